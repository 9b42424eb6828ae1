//! `[section]` / `key = value` experiment configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use ini::Ini;
use num_rational::BigRational;
use thiserror::Error;

use crate::hamiltonian::{FactorTriple, OrderingParams, SiteConvention, SPACING};
use crate::lattice::ChainSpec;
use crate::spectral::DEFAULT_TOL;
use crate::symexpr::{canonicalize, parse_expr, Expr, ExprError, PI_NAME};

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_REFINE: usize = 8;
/// Profile parameter bound to the box length unless given explicitly.
pub const LENGTH_PARAM: &str = "L";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key(s): {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("duplicate key {0}")]
    Duplicate(String),
    #[error("missing required key {0}")]
    Missing(String),
    #[error("invalid value for {key}: {message}")]
    Invalid { key: String, message: String },
    #[error("cannot parse {key}: {source}")]
    Expr {
        key: String,
        #[source]
        source: ExprError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    Verify,
    SpectrumChain,
    SpectrumEffective,
    Compare,
    Convergence,
    OrderingSweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Verify,
        ExperimentKind::SpectrumChain,
        ExperimentKind::SpectrumEffective,
        ExperimentKind::Compare,
        ExperimentKind::Convergence,
        ExperimentKind::OrderingSweep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Verify => "verify",
            ExperimentKind::SpectrumChain => "spectrum-chain",
            ExperimentKind::SpectrumEffective => "spectrum-effective",
            ExperimentKind::Compare => "compare",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::OrderingSweep => "ordering-sweep",
        }
    }

    fn needs_profile(self) -> bool {
        self != ExperimentKind::Verify
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExperimentKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.as_str()).collect();
            format!("`{s}` is not one of {}", names.join(", "))
        })
    }
}

/// Expression together with the text it was parsed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub text: String,
    pub expr: Expr,
}

/// Value of an ordering exponent.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderingValue {
    Symbolic,
    Values(Vec<BigRational>),
}

impl fmt::Display for OrderingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderingValue::Symbolic => f.write_str("symbolic"),
            OrderingValue::Values(v) => {
                let parts: Vec<String> = v.iter().map(|r| r.to_string()).collect();
                f.write_str(&parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    /// One site count, or the increasing list of a convergence run.
    pub n: Vec<usize>,
    pub a: Option<f64>,
    pub length: Option<f64>,
    pub x1: Option<f64>,
    pub convention: SiteConvention,
}

impl Geometry {
    /// `a` as given, else `L / (N+1)`.
    pub fn spacing(&self, n: usize) -> f64 {
        match (self.a, self.length) {
            (Some(a), _) => a,
            (None, Some(l)) => l / (n as f64 + 1.0),
            (None, None) => f64::NAN,
        }
    }

    pub fn box_length(&self, n: usize) -> f64 {
        self.length.unwrap_or_else(|| (n as f64 + 1.0) * self.spacing(n))
    }

    pub fn first_site(&self, n: usize) -> f64 {
        self.x1.unwrap_or_else(|| self.spacing(n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub j: Option<Profile>,
    pub eps: Profile,
    /// Numeric profile parameters other than `L`.
    pub params: BTreeMap<String, f64>,
    pub geometry: Geometry,
    pub alpha: OrderingValue,
    pub gamma: OrderingValue,
    pub triple: Option<[Profile; 3]>,
    pub k: usize,
    pub tol: f64,
    pub refine: usize,
    pub csv_path: Option<String>,
    pub report_path: Option<String>,
}

impl ExperimentConfig {
    pub fn n(&self) -> usize {
        self.geometry.n[0]
    }

    pub fn j_profile(&self) -> &Expr {
        &self.j.as_ref().expect("validated: numeric experiments carry a J profile").expr
    }

    /// Parameter values for `n` sites, with `L` bound to the box length
    /// unless set explicitly.
    pub fn profile_params(&self, n: usize) -> BTreeMap<String, f64> {
        let mut p = self.params.clone();
        p.entry(LENGTH_PARAM.to_string()).or_insert_with(|| self.geometry.box_length(n));
        p
    }

    pub fn chain_spec(&self, n: usize) -> ChainSpec {
        let mut s = ChainSpec::new(n, self.geometry.spacing(n), self.j_profile().clone(), self.eps.expr.clone())
            .with_convention(self.geometry.convention);
        s.x1 = self.geometry.first_site(n);
        s.params = self.profile_params(n);
        s
    }

    pub fn ordering(&self) -> OrderingParams {
        match (&self.alpha, &self.gamma) {
            (OrderingValue::Values(a), OrderingValue::Values(g)) => OrderingParams::rational(a[0].clone(), g[0].clone()),
            (a, g) => {
                let pick = |v: &OrderingValue, name: &str| match v {
                    OrderingValue::Symbolic => Expr::param(name),
                    OrderingValue::Values(v) => Expr::Const(v[0].clone()),
                };
                OrderingParams::new(pick(a, crate::hamiltonian::ALPHA), pick(g, crate::hamiltonian::GAMMA))
                    .expect("constants and bare parameters are affine")
            }
        }
    }

    pub fn factor_triple(&self) -> FactorTriple {
        match &self.triple {
            Some([a, b, c]) => FactorTriple::new(a.expr.clone(), b.expr.clone(), c.expr.clone()),
            None => FactorTriple::abstract_symbols(),
        }
    }

    /// Every effective setting, defaults included, as `(key, value)` lines.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![("experiment.kind".to_string(), self.kind.to_string())];
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        if let Some(j) = &self.j {
            push("profiles.J", j.text.clone());
        }
        push("profiles.eps", self.eps.text.clone());
        for (k, v) in &self.params {
            push(&format!("profiles.{k}"), v.to_string());
        }
        let g = &self.geometry;
        let ns: Vec<String> = g.n.iter().map(|n| n.to_string()).collect();
        push("geometry.N", ns.join(", "));
        push(
            "geometry.a",
            g.a.map_or_else(|| format!("L/(N+1) = {}", list(&g.n, |n| g.spacing(n))), |a| a.to_string()),
        );
        push(
            "geometry.L",
            g.length.map_or_else(|| format!("(N+1)a = {}", list(&g.n, |n| g.box_length(n))), |l| l.to_string()),
        );
        push("geometry.x1", g.x1.map_or_else(|| format!("a = {}", list(&g.n, |n| g.spacing(n))), |x| x.to_string()));
        push("geometry.convention", g.convention.to_string());
        push("ordering.alpha", self.alpha.to_string());
        push("ordering.gamma", self.gamma.to_string());
        match &self.triple {
            Some(t) => {
                for (name, p) in ["J1", "J2", "J3"].iter().zip(t) {
                    push(&format!("triple.{name}"), p.text.clone());
                }
            }
            None => push("triple", "J1 J2 J3 (abstract)".into()),
        }
        push("solver.k", self.k.to_string());
        push("solver.tol", format!("{:e}", self.tol));
        push("solver.refine", self.refine.to_string());
        push("output.csv", self.csv_path.clone().unwrap_or_else(|| "(default)".into()));
        push("output.report", self.report_path.clone().unwrap_or_else(|| "(default)".into()));
        out
    }
}

fn list(ns: &[usize], f: impl Fn(usize) -> f64) -> String {
    let v: Vec<String> = ns.iter().map(|n| f(*n).to_string()).collect();
    v.join(", ")
}

const SECTIONS: [&str; 7] = ["experiment", "profiles", "geometry", "ordering", "triple", "solver", "output"];

/// Raw key/value pairs, tracking which keys were consumed.
struct Raw {
    entries: BTreeMap<(String, String), String>,
    used: BTreeSet<(String, String)>,
}

impl Raw {
    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        let id = (section.to_string(), key.to_string());
        let v = self.entries.get(&id).cloned();
        if v.is_some() {
            self.used.insert(id);
        }
        v
    }

    fn leftovers(&self, section: &str) -> Vec<(String, String)> {
        self.entries
            .iter()
            .filter(|((s, k), _)| s == section && !self.used.contains(&(s.clone(), k.clone())))
            .map(|((_, k), v)| (k.clone(), v.clone()))
            .collect()
    }
}

fn key_name(section: &str, key: &str) -> String {
    format!("[{section}] {key}")
}

fn invalid(section: &str, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key_name(section, key), message: message.into() }
}

fn parse_f64(section: &str, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.trim().parse().map_err(|_| invalid(section, key, format!("`{v}` is not a number")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(section, key, "must be finite"))
    }
}

fn parse_usize(section: &str, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.trim().parse().map_err(|_| invalid(section, key, format!("`{v}` is not a nonnegative integer")))
}

fn parse_profile(section: &str, key: &str, v: &str) -> Result<Profile, ConfigError> {
    let expr = parse_expr(v).map_err(|source| ConfigError::Expr { key: key_name(section, key), source })?;
    Ok(Profile { text: v.trim().to_string(), expr })
}

fn parse_rational(section: &str, key: &str, v: &str) -> Result<BigRational, ConfigError> {
    parse_expr(v)
        .ok()
        .and_then(|e| canonicalize(&e).ok())
        .and_then(|c| c.as_constant())
        .ok_or_else(|| invalid(section, key, format!("`{}` is not a number or `symbolic`", v.trim())))
}

fn parse_ordering(section: &str, key: &str, v: Option<String>) -> Result<OrderingValue, ConfigError> {
    match v.as_deref().map(str::trim) {
        None | Some("symbolic") => Ok(OrderingValue::Symbolic),
        Some(text) => Ok(OrderingValue::Values(
            text.split(',').map(|t| parse_rational(section, key, t)).collect::<Result<_, _>>()?,
        )),
    }
}

/// Parses and validates an experiment configuration, applying defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let stripped: String = text.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join("\n");
    let ini = Ini::load_from_str(&stripped).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut entries = BTreeMap::new();
    let mut unknown = Vec::new();
    for (section, props) in ini.iter() {
        let Some(section) = section else {
            unknown.extend(props.iter().map(|(k, _)| format!("{k} (outside any section)")));
            continue;
        };
        if !SECTIONS.contains(&section) {
            return Err(ConfigError::UnknownSection(section.to_string()));
        }
        for (k, v) in props.iter() {
            if entries.insert((section.to_string(), k.to_string()), v.to_string()).is_some() {
                return Err(ConfigError::Duplicate(key_name(section, k)));
            }
        }
    }
    let mut raw = Raw { entries, used: BTreeSet::new() };

    let kind: ExperimentKind = raw
        .take("experiment", "kind")
        .ok_or_else(|| ConfigError::Missing(key_name("experiment", "kind")))?
        .trim()
        .parse()
        .map_err(|m: String| invalid("experiment", "kind", m))?;

    let j = raw.take("profiles", "J").map(|v| parse_profile("profiles", "J", &v)).transpose()?;
    if j.is_none() && kind.needs_profile() {
        return Err(ConfigError::Missing(key_name("profiles", "J")));
    }
    let eps = parse_profile("profiles", "eps", &raw.take("profiles", "eps").unwrap_or_else(|| "0".into()))?;

    let mut geometry = Geometry {
        n: Vec::new(),
        a: raw.take("geometry", "a").map(|v| parse_f64("geometry", "a", &v)).transpose()?,
        length: raw.take("geometry", "L").map(|v| parse_f64("geometry", "L", &v)).transpose()?,
        x1: raw.take("geometry", "x1").map(|v| parse_f64("geometry", "x1", &v)).transpose()?,
        convention: match raw.take("geometry", "convention") {
            Some(v) => v.trim().parse().map_err(|m: String| invalid("geometry", "convention", m))?,
            None => SiteConvention::Left,
        },
    };
    if let Some(v) = raw.take("geometry", "N") {
        geometry.n = v.split(',').map(|t| parse_usize("geometry", "N", t)).collect::<Result<_, _>>()?;
    }

    // [profiles] L doubles as the box length
    let profile_length = raw.take("profiles", LENGTH_PARAM).map(|v| parse_f64("profiles", LENGTH_PARAM, &v)).transpose()?;
    match (profile_length, geometry.length) {
        (Some(p), Some(g)) if p != g => {
            return Err(invalid("profiles", LENGTH_PARAM, format!("{p} conflicts with [geometry] L = {g}")))
        }
        (Some(p), None) => geometry.length = Some(p),
        _ => {}
    }

    let mut params = BTreeMap::new();
    let mut referenced: BTreeSet<String> = eps.expr.param_names();
    if let Some(j) = &j {
        referenced.extend(j.expr.param_names());
    }
    let mut unknown_profile = Vec::new();
    for (k, v) in raw.leftovers("profiles") {
        raw.used.insert(("profiles".into(), k.clone()));
        if referenced.contains(&k) && k != SPACING {
            params.insert(k.clone(), parse_f64("profiles", &k, &v)?);
        } else {
            unknown_profile.push(key_name("profiles", &k));
        }
    }

    let alpha = parse_ordering("ordering", "alpha", raw.take("ordering", "alpha"))?;
    let gamma = parse_ordering("ordering", "gamma", raw.take("ordering", "gamma"))?;

    let triple_keys = ["J1", "J2", "J3"];
    let triple_vals: Vec<Option<String>> = triple_keys.iter().map(|k| raw.take("triple", k)).collect();
    let triple = match triple_vals.iter().filter(|v| v.is_some()).count() {
        0 => None,
        3 => {
            let mut ps = Vec::with_capacity(3);
            for (k, v) in triple_keys.iter().zip(&triple_vals) {
                let p = parse_profile("triple", k, v.as_deref().unwrap())?;
                canonicalize(&p.expr).map_err(|source| ConfigError::Expr { key: key_name("triple", k), source })?;
                ps.push(p);
            }
            let [a, b, c]: [Profile; 3] = ps.try_into().expect("three factors");
            Some([a, b, c])
        }
        _ => {
            let missing = triple_keys.iter().zip(&triple_vals).find(|(_, v)| v.is_none()).unwrap().0;
            return Err(ConfigError::Missing(key_name("triple", missing)));
        }
    };

    let k = raw.take("solver", "k").map(|v| parse_usize("solver", "k", &v)).transpose()?.unwrap_or(DEFAULT_K);
    let tol = raw.take("solver", "tol").map(|v| parse_f64("solver", "tol", &v)).transpose()?.unwrap_or(DEFAULT_TOL);
    let refine =
        raw.take("solver", "refine").map(|v| parse_usize("solver", "refine", &v)).transpose()?.unwrap_or(DEFAULT_REFINE);
    let csv_path = raw.take("output", "csv").map(|s| s.trim().to_string());
    let report_path = raw.take("output", "report").map(|s| s.trim().to_string());

    for section in SECTIONS {
        unknown.extend(raw.leftovers(section).into_iter().map(|(k, _)| key_name(section, &k)));
    }
    unknown.extend(unknown_profile);
    if !unknown.is_empty() {
        unknown.sort();
        return Err(ConfigError::UnknownKeys(unknown));
    }

    let cfg = ExperimentConfig {
        kind,
        j,
        eps,
        params,
        geometry,
        alpha,
        gamma,
        triple,
        k,
        tol,
        refine,
        csv_path,
        report_path,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if !(cfg.tol > 0.0) {
        return Err(invalid("solver", "tol", "must be positive"));
    }
    if cfg.k == 0 {
        return Err(invalid("solver", "k", "must be at least 1"));
    }
    if cfg.refine == 0 {
        return Err(invalid("solver", "refine", "must be at least 1"));
    }
    let single = |v: &OrderingValue, key: &str| match v {
        OrderingValue::Values(v) if v.len() > 1 => {
            Err(invalid("ordering", key, "a list of values is only meaningful for ordering-sweep"))
        }
        _ => Ok(()),
    };
    if cfg.kind == ExperimentKind::Verify {
        single(&cfg.alpha, "alpha")?;
        return single(&cfg.gamma, "gamma");
    }

    let g = &cfg.geometry;
    if g.n.is_empty() {
        return Err(ConfigError::Missing(key_name("geometry", "N")));
    }
    if g.n.contains(&0) {
        return Err(invalid("geometry", "N", "site counts must be at least 1"));
    }
    for (key, v) in [("a", g.a), ("L", g.length)] {
        if matches!(v, Some(x) if x <= 0.0) {
            return Err(invalid("geometry", key, "must be positive"));
        }
    }
    if cfg.kind == ExperimentKind::Convergence {
        if g.n.len() < 3 {
            return Err(invalid("geometry", "N", "a convergence run needs at least 3 site counts"));
        }
        if g.n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("geometry", "N", "site counts must be strictly increasing"));
        }
        if g.length.is_none() {
            return Err(ConfigError::Missing(key_name("geometry", "L")));
        }
        if g.a.is_some() {
            return Err(invalid("geometry", "a", "is derived as L/(N+1) in a convergence run"));
        }
        if g.x1.is_some() {
            return Err(invalid("geometry", "x1", "is fixed to a in a convergence run"));
        }
    } else if g.n.len() > 1 {
        return Err(invalid("geometry", "N", "a list of site counts is only meaningful for convergence"));
    }
    match (g.a, g.length) {
        (None, None) => return Err(ConfigError::Missing(format!("{} or {}", key_name("geometry", "a"), key_name("geometry", "L")))),
        (Some(a), Some(l)) => {
            let n = g.n[0] as f64;
            if ((n + 1.0) * a - l).abs() > 1e-12 * l {
                return Err(invalid("geometry", "a", format!("a = {a} is inconsistent with L = {l} and N = {n}")));
            }
        }
        _ => {}
    }
    let min_n = *g.n.iter().min().unwrap();
    if cfg.k > min_n {
        return Err(invalid("solver", "k", format!("k = {} exceeds N = {min_n}", cfg.k)));
    }

    let mut bound: BTreeSet<String> = cfg.params.keys().cloned().collect();
    bound.insert(LENGTH_PARAM.into());
    bound.insert(PI_NAME.into());
    for (key, p) in [("J", cfg.j.as_ref()), ("eps", Some(&cfg.eps))] {
        let Some(p) = p else { continue };
        if p.expr.contains_func() {
            return Err(invalid("profiles", key, "must be a closed form in x without function symbols"));
        }
        if let Some(free) = p.expr.param_names().difference(&bound).next() {
            return Err(ConfigError::Missing(format!("{} (parameter of {key})", key_name("profiles", free))));
        }
    }

    if cfg.kind == ExperimentKind::OrderingSweep {
        for (key, v) in [("alpha", &cfg.alpha), ("gamma", &cfg.gamma)] {
            if *v == OrderingValue::Symbolic {
                return Err(invalid("ordering", key, "ordering-sweep requires numeric grids, not `symbolic`"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_verify_applies_defaults() {
        let c = parse_config("[experiment]\nkind = verify\n").unwrap();
        assert_eq!(c.kind, ExperimentKind::Verify);
        assert_eq!((c.k, c.tol, c.refine), (3, 1e-12, 8));
        assert_eq!(c.geometry.convention, SiteConvention::Left);
        assert_eq!(c.alpha, OrderingValue::Symbolic);
        assert!(c.triple.is_none());
    }

    #[test]
    fn profile_parameter_binding() {
        let c = parse_config(
            "[experiment]\nkind = compare\n[profiles]\nJ = -(1+0.2*cos(2*pi*x/L))\nL = 1\n[geometry]\nN = 200\n",
        )
        .unwrap();
        assert_eq!(c.geometry.length, Some(1.0));
        assert_eq!(c.profile_params(200)["L"], 1.0);
        assert!((c.geometry.spacing(200) - 1.0 / 201.0).abs() < 1e-16);
        assert_eq!(c.geometry.first_site(200), c.geometry.spacing(200));
        let s = c.chain_spec(200);
        assert_eq!(s.params["L"], 1.0);
    }

    #[test]
    fn symbolic_alpha_rejected_for_sweep() {
        let err = parse_config(
            "[experiment]\nkind = ordering-sweep\n[profiles]\nJ = -1\n[geometry]\nN = 10\na = 0.1\n[ordering]\nalpha = symbolic\ngamma = 0\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("requires numeric grids"), "{err}");
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = parse_config("[experiment]\nkind = verify\ncolour = red\n[solver]\nspeed = 3\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKeys(vec!["[experiment] colour".into(), "[solver] speed".into()])
        );
    }

    #[test]
    fn unused_profile_parameter_is_unknown() {
        let err = parse_config("[experiment]\nkind = compare\n[profiles]\nJ = -1\nq = 2\n[geometry]\nN = 5\na = 0.1\n")
            .unwrap_err();
        assert_eq!(err, ConfigError::UnknownKeys(vec!["[profiles] q".into()]));
    }

    #[test]
    fn missing_and_malformed_values() {
        assert_eq!(parse_config("[solver]\nk = 2\n").unwrap_err(), ConfigError::Missing("[experiment] kind".into()));
        assert!(matches!(
            parse_config("[experiment]\nkind = compare\n[geometry]\nN = 5\na = 1\n").unwrap_err(),
            ConfigError::Missing(k) if k == "[profiles] J"
        ));
        let err = parse_config("[experiment]\nkind = compare\n[profiles]\nJ = -(1+\n[geometry]\nN = 5\na = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Expr { source: ExprError::Syntax { .. }, .. }), "{err}");
        let err = parse_config("[experiment]\nkind = compare\n[profiles]\nJ = -k*x\n[geometry]\nN = 5\na = 1\n").unwrap_err();
        assert!(err.to_string().contains("[profiles] k"), "{err}");
        assert!(parse_config("[experiment]\nkind = foo\n").is_err());
        assert!(parse_config("[bogus]\nx = 1\n").is_err());
        assert!(parse_config("[experiment]\nkind = verify\nkind = verify\n").is_err());
    }

    #[test]
    fn comments_and_lists() {
        let c = parse_config(
            "# convergence study\n[experiment]\nkind = convergence # trailing\n[profiles]\nJ = -(1+0.2*cos(2*pi*x/L))\n\
             [geometry]\nN = 100, 200, 400, 800\nL = 1\n",
        )
        .unwrap();
        assert_eq!(c.geometry.n, vec![100, 200, 400, 800]);
        assert!((c.geometry.spacing(400) - 1.0 / 401.0).abs() < 1e-16);
    }

    #[test]
    fn convergence_validation() {
        let base = "[experiment]\nkind = convergence\n[profiles]\nJ = -1\n[geometry]\n";
        assert!(parse_config(&format!("{base}N = 100, 200\nL = 1\n")).is_err());
        assert!(parse_config(&format!("{base}N = 100, 400, 200\nL = 1\n")).is_err());
        assert!(parse_config(&format!("{base}N = 100, 200, 400\na = 0.01\n")).is_err());
    }

    #[test]
    fn geometry_consistency() {
        let base = "[experiment]\nkind = spectrum-chain\n[profiles]\nJ = -1\n[geometry]\nN = 9\n";
        assert!(parse_config(&format!("{base}a = 0.1\nL = 1\n")).is_ok());
        assert!(parse_config(&format!("{base}a = 0.2\nL = 1\n")).is_err());
        assert!(parse_config(&format!("{base}a = 0.1\n[solver]\nk = 10\n")).is_err());
    }

    #[test]
    fn ordering_values_are_exact() {
        let c = parse_config("[experiment]\nkind = verify\n[ordering]\nalpha = 0.3\ngamma = -7/10\n").unwrap();
        let p = c.ordering();
        assert_eq!(p.alpha(), &Expr::ratio(3, 10));
        assert_eq!(p.gamma(), &Expr::ratio(-7, 10));
        assert!(parse_config("[experiment]\nkind = verify\n[ordering]\nalpha = 0, 1\n").is_err());
    }

    #[test]
    fn triple_must_be_complete_and_symbolic() {
        let base = "[experiment]\nkind = verify\n[triple]\n";
        let c = parse_config(&format!("{base}J1 = J^alpha\nJ2 = J^(1-alpha-gamma)\nJ3 = J^gamma\n")).unwrap();
        assert!(c.triple.is_some());
        assert!(parse_config(&format!("{base}J1 = J\nJ2 = 1\n")).is_err());
        assert!(parse_config(&format!("{base}J1 = sin(x)\nJ2 = 1\nJ3 = J\n")).is_err());
    }

    #[test]
    fn echo_lists_defaults() {
        let c = parse_config("[experiment]\nkind = verify\n").unwrap();
        let echo = c.echo();
        let get = |k: &str| echo.iter().find(|(key, _)| key == k).map(|(_, v)| v.clone()).unwrap();
        assert_eq!(get("solver.tol"), "1e-12");
        assert_eq!(get("geometry.convention"), "left");
        assert_eq!(get("ordering.alpha"), "symbolic");
    }
}
