//! `key = value` experiment configuration with `[section]` headers.
//!
//! Every key has a default (see [`ExperimentConfig::default_for`]); unknown
//! keys are errors. [`ExperimentConfig::to_text`] writes every field, and
//! parsing that text gives back the same config.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CouplingKind;
use crate::propagate::InteractionSolver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Ground,
    Emit,
    Scatter,
    Susceptibility,
    Circuit,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::Ground, Scenario::Emit, Scenario::Scatter, Scenario::Susceptibility, Scenario::Circuit];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Ground => "ground",
            Scenario::Emit => "emit",
            Scenario::Scatter => "scatter",
            Scenario::Susceptibility => "susceptibility",
            Scenario::Circuit => "circuit",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown scenario '{s}'"))
    }
}

/// Where the qubit sits on the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitSite {
    /// Site 0, except mid-chain for scattering.
    Auto,
    /// Site `L/2`.
    Mid,
    Index(usize),
}

impl QubitSite {
    pub fn resolve(self, sites: usize, scenario: Scenario) -> usize {
        match self {
            QubitSite::Index(i) => i,
            QubitSite::Mid => sites / 2,
            QubitSite::Auto if scenario == Scenario::Scatter => sites / 2,
            QubitSite::Auto => 0,
        }
    }
}

impl fmt::Display for QubitSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitSite::Auto => f.write_str("auto"),
            QubitSite::Mid => f.write_str("mid"),
            QubitSite::Index(i) => write!(f, "{i}"),
        }
    }
}

impl FromStr for QubitSite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(QubitSite::Auto),
            "mid" => Ok(QubitSite::Mid),
            _ => s.parse().map(QubitSite::Index).map_err(|_| format!("expected auto, mid or a site index, got '{s}'")),
        }
    }
}

/// How the ground state is searched for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundMethod {
    Trotter,
    Refined,
}

impl fmt::Display for GroundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroundMethod::Trotter => "trotter",
            GroundMethod::Refined => "refined",
        })
    }
}

impl FromStr for GroundMethod {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "trotter" => Ok(GroundMethod::Trotter),
            "refined" => Ok(GroundMethod::Refined),
            _ => Err(format!("expected trotter or refined, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub sites: usize,
    pub omega0: f64,
    pub omega_at: f64,
    pub epsilon: f64,
    pub g: f64,
    /// When set, `g` is derived from this fitted spectral strength.
    pub alpha: Option<f64>,
    /// Extra couplings for the ground-state scan.
    pub g_grid: Vec<f64>,
    pub coupling: CouplingKind,
    pub i_q: QubitSite,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericsConfig {
    pub chi_max: usize,
    pub svd_cutoff: f64,
    pub dt: f64,
    pub t_final: f64,
    pub krylov_dim: usize,
    pub krylov_tol: f64,
    pub solver: InteractionSolver,
    /// Steps between energy measurements; 0 disables them.
    pub energy_every: usize,
    /// Steps between real-space profile snapshots; 0 disables them.
    pub profile_every: usize,
    pub ground_method: GroundMethod,
    pub ground_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketConfig {
    pub omega: f64,
    /// Frequencies for a transmission scan; empty means just `omega`.
    pub omega_grid: Vec<f64>,
    /// Initial packet centre as a site index; `None` puts it halfway between
    /// the left wall and the qubit.
    pub x0: Option<f64>,
    /// Spectral width in units of the local mode spacing.
    pub sigma_spacings: f64,
    pub n_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityConfig {
    pub epsilon: f64,
    pub alpha_grid: Vec<f64>,
    pub fit_min: f64,
    pub fit_max: f64,
    pub tail_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub ej: f64,
    pub ec: f64,
    pub f_bias: f64,
    pub n_cutoff: usize,
    pub alpha_grid: Vec<f64>,
    pub l_ind: f64,
    pub c_cap: f64,
    pub renormalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub run_id: String,
    pub out_dir: String,
    pub threads: usize,
    pub model: ModelConfig,
    pub numerics: NumericsConfig,
    pub packet: PacketConfig,
    pub susceptibility: SusceptibilityConfig,
    pub circuit: CircuitConfig,
}

/// Documented default table.
impl ExperimentConfig {
    pub fn default_for(scenario: Scenario) -> Self {
        ExperimentConfig {
            scenario,
            run_id: scenario.name().to_string(),
            out_dir: "runs".to_string(),
            threads: 1,
            model: ModelConfig {
                sites: 121,
                omega0: 1.0,
                omega_at: 1.0 / 3.0,
                epsilon: 0.0,
                g: 0.475,
                alpha: None,
                g_grid: Vec::new(),
                coupling: CouplingKind::Flux,
                i_q: QubitSite::Auto,
                n_max: 4,
            },
            numerics: NumericsConfig {
                chi_max: 40,
                svd_cutoff: 1e-8,
                dt: 0.05,
                t_final: 60.0,
                krylov_dim: 8,
                krylov_tol: 1e-8,
                solver: InteractionSolver::Factorized,
                energy_every: 20,
                profile_every: 20,
                ground_method: GroundMethod::Trotter,
                ground_tol: 1e-9,
            },
            packet: PacketConfig { omega: 0.3, omega_grid: Vec::new(), x0: None, sigma_spacings: 8.0, n_bar: 1.0 },
            susceptibility: SusceptibilityConfig {
                epsilon: 0.02,
                alpha_grid: vec![0.1, 0.2, 0.3, 0.4, 1.2],
                fit_min: 0.1,
                fit_max: 0.4,
                tail_fraction: 0.1,
            },
            circuit: CircuitConfig {
                ej: 50.0,
                ec: 1.0,
                f_bias: 0.5,
                n_cutoff: 10,
                alpha_grid: (0..=30).map(|i| (55 + i) as f64 / 100.0).collect(),
                l_ind: 1.3,
                c_cap: 0.125,
                renormalize: false,
            },
        }
    }

    pub fn qubit_site(&self) -> usize {
        self.model.i_q.resolve(self.model.sites, self.scenario)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::config(0, msg));
        if self.run_id.is_empty() || self.run_id.contains(['/', '\\']) || self.run_id.starts_with('.') {
            return bad(format!("run_id '{}' is not a plain directory name", self.run_id));
        }
        if self.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        let m = &self.model;
        if m.sites < 2 || m.n_max < 1 || !(m.omega0 > 0.0) || !(m.omega_at >= 0.0) {
            return bad("model needs sites >= 2, n_max >= 1, omega0 > 0 and omega_at >= 0".into());
        }
        if self.qubit_site() >= m.sites {
            return bad(format!("i_q = {} is outside a chain of {} sites", self.qubit_site(), m.sites));
        }
        if matches!(m.alpha, Some(a) if !(a >= 0.0)) {
            return bad("alpha must be non-negative".into());
        }
        let n = &self.numerics;
        if n.chi_max == 0 || !(n.dt > 0.0) || !(n.t_final > 0.0) || n.krylov_dim < 2 {
            return bad("numerics need chi_max >= 1, dt > 0, t_final > 0 and krylov_dim >= 2".into());
        }
        if !(n.svd_cutoff >= 0.0) || !(n.krylov_tol > 0.0) || !(n.ground_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        let p = &self.packet;
        if !(p.sigma_spacings > 0.0) || !(p.n_bar > 0.0) {
            return bad("packet width and photon number must be positive".into());
        }
        let s = &self.susceptibility;
        if !(s.epsilon > 0.0) || !(s.tail_fraction > 0.0 && s.tail_fraction <= 1.0) {
            return bad("susceptibility needs epsilon > 0 and tail_fraction in (0, 1]".into());
        }
        let c = &self.circuit;
        if !(c.l_ind > 0.0 && c.c_cap > 0.0 && c.ej > 0.0 && c.ec > 0.0) || c.alpha_grid.is_empty() {
            return bad("circuit needs positive parameters and a non-empty alpha_grid".into());
        }
        Ok(())
    }

    /// Full resolved configuration in the input format.
    pub fn to_text(&self) -> String {
        let mut w = Writer::default();
        w.kv("scenario", self.scenario.to_string());
        w.kv("run_id", self.run_id.clone());
        w.kv("out_dir", self.out_dir.clone());
        w.kv("threads", self.threads.to_string());
        let m = &self.model;
        w.section("model");
        w.kv("sites", m.sites.to_string());
        w.kv("omega0", fmt_f(m.omega0));
        w.kv("omega_at", fmt_f(m.omega_at));
        w.kv("epsilon", fmt_f(m.epsilon));
        w.kv("g", fmt_f(m.g));
        w.kv("alpha", fmt_opt(m.alpha));
        w.kv("g_grid", fmt_list(&m.g_grid));
        w.kv("coupling", m.coupling.to_string());
        w.kv("i_q", m.i_q.to_string());
        w.kv("n_max", m.n_max.to_string());
        let n = &self.numerics;
        w.section("numerics");
        w.kv("chi_max", n.chi_max.to_string());
        w.kv("svd_cutoff", fmt_f(n.svd_cutoff));
        w.kv("dt", fmt_f(n.dt));
        w.kv("t_final", fmt_f(n.t_final));
        w.kv("krylov_dim", n.krylov_dim.to_string());
        w.kv("krylov_tol", fmt_f(n.krylov_tol));
        w.kv("solver", solver_name(n.solver).to_string());
        w.kv("energy_every", n.energy_every.to_string());
        w.kv("profile_every", n.profile_every.to_string());
        w.kv("ground_method", n.ground_method.to_string());
        w.kv("ground_tol", fmt_f(n.ground_tol));
        let p = &self.packet;
        w.section("packet");
        w.kv("omega", fmt_f(p.omega));
        w.kv("omega_grid", fmt_list(&p.omega_grid));
        w.kv("x0", fmt_opt(p.x0));
        w.kv("sigma_spacings", fmt_f(p.sigma_spacings));
        w.kv("n_bar", fmt_f(p.n_bar));
        let s = &self.susceptibility;
        w.section("susceptibility");
        w.kv("epsilon", fmt_f(s.epsilon));
        w.kv("alpha_grid", fmt_list(&s.alpha_grid));
        w.kv("fit_min", fmt_f(s.fit_min));
        w.kv("fit_max", fmt_f(s.fit_max));
        w.kv("tail_fraction", fmt_f(s.tail_fraction));
        let c = &self.circuit;
        w.section("circuit");
        w.kv("ej", fmt_f(c.ej));
        w.kv("ec", fmt_f(c.ec));
        w.kv("f_bias", fmt_f(c.f_bias));
        w.kv("n_cutoff", c.n_cutoff.to_string());
        w.kv("alpha_grid", fmt_list(&c.alpha_grid));
        w.kv("l_ind", fmt_f(c.l_ind));
        w.kv("c_cap", fmt_f(c.c_cap));
        w.kv("renormalize", c.renormalize.to_string());
        w.0
    }
}

#[derive(Default)]
struct Writer(String);

impl Writer {
    fn section(&mut self, name: &str) {
        self.0.push_str(&format!("\n[{name}]\n"));
    }

    fn kv(&mut self, key: &str, value: String) {
        self.0.push_str(&format!("{key} = {value}\n"));
    }
}

fn solver_name(s: InteractionSolver) -> &'static str {
    match s {
        InteractionSolver::Krylov => "krylov",
        InteractionSolver::Factorized => "factorized",
    }
}

/// Shortest representation that parses back to the same `f64`.
fn fmt_f(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_else(|| "none".into())
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(", ")
}

struct Entry {
    value: String,
    line: usize,
}

/// Raw `(section, key) -> value` table, consumed field by field.
struct Table {
    entries: BTreeMap<(String, String), Entry>,
}

impl Table {
    fn take<T>(&mut self, section: &str, key: &str, default: T, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        match self.entries.remove(&(section.to_string(), key.to_string())) {
            None => Ok(default),
            Some(e) => parse(&e.value).map_err(|msg| {
                let name = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
                Error::config(e.line, format!("{name}: {msg}"))
            }),
        }
    }
}

fn num<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse '{s}' as a number"))
}

fn opt_f(s: &str) -> std::result::Result<Option<f64>, String> {
    if s == "none" {
        Ok(None)
    } else {
        num(s).map(Some)
    }
}

fn list(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| num(x.trim())).collect()
}

fn boolean(s: &str) -> std::result::Result<bool, String> {
    s.parse().map_err(|_| format!("expected true or false, got '{s}'"))
}

fn solver(s: &str) -> std::result::Result<InteractionSolver, String> {
    match s {
        "krylov" => Ok(InteractionSolver::Krylov),
        "factorized" => Ok(InteractionSolver::Factorized),
        _ => Err(format!("expected krylov or factorized, got '{s}'")),
    }
}

fn plain<T: FromStr<Err = String>>(s: &str) -> std::result::Result<T, String> {
    s.parse()
}

const SECTIONS: [&str; 5] = ["model", "numerics", "packet", "susceptibility", "circuit"];

fn tokenize(text: &str) -> Result<Table> {
    let mut entries = BTreeMap::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::config(line, "unterminated section header"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(Error::config(line, format!("unknown section [{name}]")));
            }
            section = name.to_string();
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| Error::config(line, format!("expected 'key = value', got '{content}'")))?;
        let key = (section.clone(), k.trim().to_string());
        if key.1.is_empty() {
            return Err(Error::config(line, "empty key"));
        }
        if entries.contains_key(&key) {
            return Err(Error::config(line, format!("duplicate key '{}'", key.1)));
        }
        entries.insert(key, Entry { value: v.trim().to_string(), line });
    }
    Ok(Table { entries })
}

/// Parses and resolves a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut t = tokenize(text)?;
    let scenario_entry = t
        .entries
        .remove(&(String::new(), "scenario".to_string()))
        .ok_or_else(|| Error::config(0, "missing scenario"))?;
    let scenario: Scenario =
        scenario_entry.value.parse().map_err(|m: String| Error::config(scenario_entry.line, m))?;
    let d = ExperimentConfig::default_for(scenario);
    let text_val = |s: &str| Ok::<_, String>(s.to_string());
    let cfg = ExperimentConfig {
        scenario,
        run_id: t.take("", "run_id", d.run_id, text_val)?,
        out_dir: t.take("", "out_dir", d.out_dir, text_val)?,
        threads: t.take("", "threads", d.threads, num)?,
        model: ModelConfig {
            sites: t.take("model", "sites", d.model.sites, num)?,
            omega0: t.take("model", "omega0", d.model.omega0, num)?,
            omega_at: t.take("model", "omega_at", d.model.omega_at, num)?,
            epsilon: t.take("model", "epsilon", d.model.epsilon, num)?,
            g: t.take("model", "g", d.model.g, num)?,
            alpha: t.take("model", "alpha", d.model.alpha, opt_f)?,
            g_grid: t.take("model", "g_grid", d.model.g_grid, list)?,
            coupling: t.take("model", "coupling", d.model.coupling, |s| {
                s.parse::<CouplingKind>().map_err(|e| e.to_string())
            })?,
            i_q: t.take("model", "i_q", d.model.i_q, plain)?,
            n_max: t.take("model", "n_max", d.model.n_max, num)?,
        },
        numerics: NumericsConfig {
            chi_max: t.take("numerics", "chi_max", d.numerics.chi_max, num)?,
            svd_cutoff: t.take("numerics", "svd_cutoff", d.numerics.svd_cutoff, num)?,
            dt: t.take("numerics", "dt", d.numerics.dt, num)?,
            t_final: t.take("numerics", "t_final", d.numerics.t_final, num)?,
            krylov_dim: t.take("numerics", "krylov_dim", d.numerics.krylov_dim, num)?,
            krylov_tol: t.take("numerics", "krylov_tol", d.numerics.krylov_tol, num)?,
            solver: t.take("numerics", "solver", d.numerics.solver, solver)?,
            energy_every: t.take("numerics", "energy_every", d.numerics.energy_every, num)?,
            profile_every: t.take("numerics", "profile_every", d.numerics.profile_every, num)?,
            ground_method: t.take("numerics", "ground_method", d.numerics.ground_method, plain)?,
            ground_tol: t.take("numerics", "ground_tol", d.numerics.ground_tol, num)?,
        },
        packet: PacketConfig {
            omega: t.take("packet", "omega", d.packet.omega, num)?,
            omega_grid: t.take("packet", "omega_grid", d.packet.omega_grid, list)?,
            x0: t.take("packet", "x0", d.packet.x0, opt_f)?,
            sigma_spacings: t.take("packet", "sigma_spacings", d.packet.sigma_spacings, num)?,
            n_bar: t.take("packet", "n_bar", d.packet.n_bar, num)?,
        },
        susceptibility: SusceptibilityConfig {
            epsilon: t.take("susceptibility", "epsilon", d.susceptibility.epsilon, num)?,
            alpha_grid: t.take("susceptibility", "alpha_grid", d.susceptibility.alpha_grid, list)?,
            fit_min: t.take("susceptibility", "fit_min", d.susceptibility.fit_min, num)?,
            fit_max: t.take("susceptibility", "fit_max", d.susceptibility.fit_max, num)?,
            tail_fraction: t.take("susceptibility", "tail_fraction", d.susceptibility.tail_fraction, num)?,
        },
        circuit: CircuitConfig {
            ej: t.take("circuit", "ej", d.circuit.ej, num)?,
            ec: t.take("circuit", "ec", d.circuit.ec, num)?,
            f_bias: t.take("circuit", "f_bias", d.circuit.f_bias, num)?,
            n_cutoff: t.take("circuit", "n_cutoff", d.circuit.n_cutoff, num)?,
            alpha_grid: t.take("circuit", "alpha_grid", d.circuit.alpha_grid, list)?,
            l_ind: t.take("circuit", "l_ind", d.circuit.l_ind, num)?,
            c_cap: t.take("circuit", "c_cap", d.circuit.c_cap, num)?,
            renormalize: t.take("circuit", "renormalize", d.circuit.renormalize, boolean)?,
        },
    };
    if let Some(((section, key), e)) = t.entries.into_iter().next() {
        let name = if section.is_empty() { key } else { format!("[{section}] {key}") };
        return Err(Error::config(e.line, format!("unknown key '{name}'")));
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_resolves_defaults() {
        let c = parse_config("scenario = emit\n").unwrap();
        assert_eq!(c, ExperimentConfig::default_for(Scenario::Emit));
        assert!(c.to_text().contains("t_final = 60.0"));
    }

    #[test]
    fn round_trip_is_identity() {
        let text = "# comment\nscenario = scatter\nthreads = 3\n[model]\nsites = 40 # trailing\nalpha = 0.2\ng_grid = 0.1, 0.2\ni_q = mid\n[packet]\nx0 = 7.5\nomega_grid = 0.1,0.35\n[circuit]\nrenormalize = true\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.model.alpha, Some(0.2));
        assert_eq!(c.packet.omega_grid, vec![0.1, 0.35]);
        let again = parse_config(&c.to_text()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_text(), c.to_text());
    }

    #[test]
    fn malformed_number_names_line() {
        let err = parse_config("scenario = emit\n[model]\n\nomega_at = 0.3x\n").unwrap_err();
        match err {
            Error::Config { line, msg } => {
                assert_eq!(line, 4);
                assert!(msg.contains("omega_at"), "{msg}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_and_missing_keys() {
        assert!(matches!(parse_config("scenario = emit\nfoo = 1\n"), Err(Error::Config { line: 2, .. })));
        assert!(matches!(parse_config("[model]\nsites = 4\n"), Err(Error::Config { .. })));
        assert!(parse_config("scenario = emit\n[nope]\n").is_err());
        assert!(parse_config("scenario = emit\n[model]\nsites = 4\nsites = 5\n").is_err());
        assert!(parse_config("scenario = dance\n").is_err());
    }

    #[test]
    fn qubit_site_resolution() {
        let s = parse_config("scenario = scatter\n[model]\nsites = 40\n").unwrap();
        assert_eq!(s.qubit_site(), 20);
        let e = parse_config("scenario = emit\n[model]\nsites = 40\n").unwrap();
        assert_eq!(e.qubit_site(), 0);
        assert!(parse_config("scenario = emit\n[model]\nsites = 4\ni_q = 4\n").is_err());
    }
}
