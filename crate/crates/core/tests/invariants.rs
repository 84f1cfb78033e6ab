use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbchain::experiment::{parse_config, ExperimentConfig, QubitSite, Scenario};
use sbchain::linalg::C64;
use sbchain::model::{build_modes, effective_frequency, ChainSpec, CouplingKind, SpinBosonModel};
use sbchain::mps::{CompressionParams, MpsState, SiteTensor};

fn random_state(dims: &[usize], chi: usize, seed: u64) -> MpsState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dims.len();
    let mut left = 1;
    let tensors = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let right = if i + 1 == n { 1 } else { chi };
            let data = (0..left * d * right).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let t = SiteTensor::from_data(left, d, right, data).unwrap();
            left = right;
            t
        })
        .collect();
    let mut s = MpsState::from_tensors(tensors).unwrap();
    s.normalize();
    s
}

fn state_strategy() -> impl Strategy<Value = MpsState> {
    (prop::collection::vec(2usize..4, 2..6), 1usize..5, any::<u64>())
        .prop_map(|(dims, chi, seed)| random_state(&dims, chi, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonicalization_preserves_the_state(s in state_strategy(), c in 0usize..6) {
        let c = c % s.len();
        let mut t = s.clone();
        t.canonicalize(c);
        let overlap = s.inner(&t).unwrap();
        prop_assert!((overlap - C64::from(1.0)).norm() < 1e-10);
        prop_assert!(t.isometry_residual() < 1e-10);
    }

    #[test]
    fn compression_fidelity_and_error_add_to_one(s in state_strategy(), chi in 1usize..4) {
        let (t, err) = s.compressed(&CompressionParams::new(chi, 0.0).unwrap());
        let f = s.inner(&t).unwrap().norm_sqr();
        prop_assert!((f + err - 1.0).abs() < 1e-10, "fidelity {} error {}", f, err);
        prop_assert!(t.max_bond() <= chi);
        prop_assert!((t.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_product_is_hermitian(a in state_strategy(), seed in any::<u64>()) {
        let b = random_state(&a.phys_dims(), 2, seed);
        let ab = a.inner(&b).unwrap();
        let ba = b.inner(&a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-12);
        prop_assert!(ab.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn mode_transform_is_orthogonal(l in 2usize..40) {
        let b = build_modes(&ChainSpec::new(l, 1.0, 1).unwrap()).unwrap();
        for i in 0..l {
            for j in 0..l {
                let dot: f64 = (0..l).map(|k| b.transform[(k, i)] * b.transform[(k, j)]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-12);
            }
        }
        prop_assert!(b.frequencies.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(b.frequencies[l - 1] < 2.0);
    }

    #[test]
    fn spectral_strength_scales_as_g_squared(g in 0.05f64..1.0, i_q in 0usize..3, charge in any::<bool>()) {
        let kind = if charge { CouplingKind::Charge } else { CouplingKind::Flux };
        let m = SpinBosonModel::new(ChainSpec::new(61, 1.0, 1).unwrap(), 0.3, 0.0, g, kind, i_q).unwrap();
        let a1 = m.spectral_fit().unwrap().alpha;
        let a2 = m.with_g(2.0 * g).spectral_fit().unwrap().alpha;
        prop_assert!((a2 / a1 - 4.0).abs() < 1e-10);
        let back = m.g_for_alpha(a1).unwrap();
        prop_assert!((back - g).abs() < 1e-12 * g.max(1.0));
    }

    #[test]
    fn effective_frequency_decreases_with_alpha(a in 0.0f64..0.98, da in 0.001f64..0.02) {
        let c = 2f64.sqrt();
        let w1 = effective_frequency(1.0 / 3.0, c, a).unwrap();
        let w2 = effective_frequency(1.0 / 3.0, c, (a + da).min(0.999)).unwrap();
        prop_assert!(w2 < w1 && w1 <= 1.0 / 3.0);
    }

    #[test]
    fn config_round_trip(
        sites in 2usize..200,
        omega_at in 0.0f64..2.0,
        g in prop::collection::vec(0.0f64..3.0, 0..4),
        dt in 1e-4f64..0.5,
        x0 in prop::option::of(0.0f64..50.0),
        renorm in any::<bool>(),
        scenario in 0usize..5,
    ) {
        let mut c = ExperimentConfig::default_for(Scenario::ALL[scenario]);
        c.model.sites = sites;
        c.model.omega_at = omega_at;
        c.model.g_grid = g;
        c.model.i_q = QubitSite::Index(sites - 1);
        c.numerics.dt = dt;
        c.packet.x0 = x0;
        c.circuit.renormalize = renorm;
        let text = c.to_text();
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_text(), text);
    }
}
