//! Parameter chain `(δ, M) → (n, c, d)` and its inequality checks.
//!
//! `c = 2δ^{n²}` underflows quickly, so every parameter set carries natural
//! logarithms of `c` and `d` next to the floats. The inequality chain is always
//! decidable from the logs; surface arithmetic refuses underflowed sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `c`, `d` derived from `δ` and `n`.
    DeltaChain,
    /// User supplied `(n, c, d)` with only `0 < d < c < 1` enforced.
    Direct,
}

/// An immutable, checked parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub mode: Mode,
    pub delta: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub n: u32,
    pub c: f64,
    pub d: f64,
    pub log_c: f64,
    pub log_d: f64,
    /// `c` or `d` is not a normal f64.
    pub underflow: bool,
    /// Every link of the validation report passed.
    pub validated: bool,
}

/// Output of [`derive_cd`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCd {
    pub c: f64,
    pub d: f64,
    pub log_c: f64,
    pub log_d: f64,
    pub underflow: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    LessEq,
    /// Equal to within `1e-10` relative.
    #[serde(rename = "=")]
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub pass: bool,
    /// `true` when the comparison was made between logarithms.
    pub log_domain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub links: Vec<ChainLink>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn failed_links(&self) -> impl Iterator<Item = &ChainLink> {
        self.links.iter().filter(|l| !l.pass)
    }
}

/// The qualitative guidance for choosing `(n, c, d)`: `d^{1/n}` small, `d/c`
/// small, `(d/c)^{1/n}` not small. Diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeDiagnostics {
    pub d_root: f64,
    pub d_over_c: f64,
    pub d_over_c_root: f64,
    pub d_over_c_root_exceeds_delta: Option<bool>,
}

const IDENTITY_RTOL: f64 = 1e-10;

fn check_delta_m(delta: f64, m: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("M must be positive, got {m}")));
    }
    Ok(())
}

fn threshold(m: f64) -> f64 {
    (1.0 / (16.0 * m)).min(0.25)
}

/// Smallest `n ≥ 1` with `δ^n ≤ min{1/(16M), 1/4}`; equality counts.
pub fn choose_n(delta: f64, m: f64) -> Result<u32> {
    check_delta_m(delta, m)?;
    let target = threshold(m);
    let guess = (target.ln() / delta.ln()).ceil().max(1.0);
    if guess > i32::MAX as f64 {
        return Err(Error::InvalidParameter(format!("n for delta = {delta}, M = {m} exceeds i32")));
    }
    let mut n = guess as i32;
    // the log estimate can be off by one at exact boundaries such as 0.5^5 = 1/32
    while n > 1 && delta.powi(n - 1) <= target {
        n -= 1;
    }
    while delta.powi(n) > target {
        n += 1;
    }
    Ok(n as u32)
}

/// `c = 2δ^{n²}`, `d = 4δ^{n²+n}` together with their logarithms.
pub fn derive_cd(delta: f64, n: u32) -> Result<DerivedCd> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let nf = n as f64;
    let ln_delta = delta.ln();
    let log_c = std::f64::consts::LN_2 + nf * nf * ln_delta;
    let log_d = 2.0 * std::f64::consts::LN_2 + (nf * nf + nf) * ln_delta;
    // integer powers keep the values exact when δ is a power of two
    let (c, d) = match (i32::try_from(n * n), i32::try_from(n * n + n)) {
        (Ok(e_c), Ok(e_d)) => (2.0 * delta.powi(e_c), 4.0 * delta.powi(e_d)),
        _ => (log_c.exp(), log_d.exp()),
    };
    let underflow = !c.is_normal() || !d.is_normal();
    Ok(DerivedCd {
        c: if c.is_normal() { c } else { 0.0 },
        d: if d.is_normal() { d } else { 0.0 },
        log_c,
        log_d,
        underflow,
    })
}

impl Params {
    /// Full chain: `n = choose_n(δ, M)`, then `c`, `d` from `δ` and `n`.
    pub fn delta_chain(delta: f64, m: f64) -> Result<Params> {
        let n = choose_n(delta, m)?;
        Params::delta_chain_with_n(delta, m, n)
    }

    /// Chain with a caller-forced `n`. The returned set may fail validation.
    pub fn delta_chain_with_n(delta: f64, m: f64, n: u32) -> Result<Params> {
        check_delta_m(delta, m)?;
        let cd = derive_cd(delta, n)?;
        if !(cd.log_d < cd.log_c && cd.log_c < 0.0) {
            return Err(Error::ParameterOrder { c: cd.c, d: cd.d });
        }
        let mut p = Params {
            mode: Mode::DeltaChain,
            delta: Some(delta),
            m: Some(m),
            n,
            c: cd.c,
            d: cd.d,
            log_c: cd.log_c,
            log_d: cd.log_d,
            underflow: cd.underflow,
            validated: false,
        };
        p.validated = validate_chain(&p).pass;
        Ok(p)
    }

    /// User-supplied triple; only `0 < d < c < 1` and `n ≥ 1` are enforced.
    pub fn direct(n: u32, c: f64, d: f64) -> Result<Params> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(d > 0.0 && d < c && c < 1.0) {
            return Err(Error::ParameterOrder { c, d });
        }
        let mut p = Params {
            mode: Mode::Direct,
            delta: None,
            m: None,
            n,
            c,
            d,
            log_c: c.ln(),
            log_d: d.ln(),
            underflow: !c.is_normal() || !d.is_normal(),
            validated: false,
        };
        p.validated = validate_chain(&p).pass;
        Ok(p)
    }

    /// Direct triple that also carries `δ` (and optionally `M`) so the corona
    /// data bound and the chain links can be checked against it.
    pub fn direct_with_delta(n: u32, c: f64, d: f64, delta: f64, m: Option<f64>) -> Result<Params> {
        let mut p = Params::direct(n, c, d)?;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
        }
        if let Some(m) = m {
            check_delta_m(delta, m)?;
        }
        p.delta = Some(delta);
        p.m = m;
        p.validated = validate_chain(&p).pass;
        Ok(p)
    }

    pub fn n_squared(&self) -> u32 {
        self.n * self.n
    }

    pub fn n_cubed(&self) -> u32 {
        self.n * self.n * self.n
    }

    /// The positive real root `d^{1/n}`, taken from the logarithm so it is
    /// meaningful even when `d` underflows.
    pub fn d_root(&self) -> f64 {
        (self.log_d / self.n as f64).exp()
    }

    /// Refuse regimes whose `c` or `d` is not representable.
    pub fn require_float(&self) -> Result<()> {
        if self.underflow {
            Err(Error::Underflow {
                log_c: self.log_c,
                log_d: self.log_d,
            })
        } else {
            Ok(())
        }
    }

    pub fn shape_diagnostics(&self) -> ShapeDiagnostics {
        let log_ratio = self.log_d - self.log_c;
        let root = (log_ratio / self.n as f64).exp();
        ShapeDiagnostics {
            d_root: self.d_root(),
            d_over_c: log_ratio.exp(),
            d_over_c_root: root,
            d_over_c_root_exceeds_delta: self.delta.map(|delta| root > delta),
        }
    }
}

fn link(name: &str, lhs: f64, rhs: f64, relation: Relation, log_domain: bool) -> ChainLink {
    let pass = match relation {
        Relation::Less => lhs < rhs,
        Relation::LessEq => lhs <= rhs,
        Relation::Equal => (lhs - rhs).abs() <= IDENTITY_RTOL * lhs.abs().max(rhs.abs()),
    };
    ChainLink {
        name: name.to_string(),
        lhs,
        rhs,
        relation,
        pass,
        log_domain,
    }
}

/// Evaluate both inequality chains link by link.
///
/// Terms in `δ^n` are evaluated as floats (they are of the order of `1/M`);
/// terms in `c` and `d` go through the stored logarithms when the floats
/// underflowed. Never fails: a broken link is reported, not raised.
pub fn validate_chain(p: &Params) -> ValidationReport {
    let mut links = Vec::new();
    let logd = p.underflow;

    links.push(link("0 < d", f64::NEG_INFINITY, p.log_d, Relation::Less, true));
    links.push(link("d < c", p.log_d, p.log_c, Relation::Less, true));
    links.push(link("c < 1", p.log_c, 0.0, Relation::Less, true));

    // d/(c - d) = 1/(c/d - 1), with c/d from the logs so underflow is harmless
    let c_over_d = (p.log_c - p.log_d).exp();
    let inner = 1.0 / (c_over_d - 1.0);

    if let Some(delta) = p.delta {
        let n = p.n as i32;
        let dn = delta.powi(n);
        let dn1 = delta.powi(n + 1);
        let one_minus_c = if logd { 1.0 } else { 1.0 - p.c };

        links.push(link(
            "4δ^(n+1)/(1-c) <= 8δ^(n+1)",
            4.0 * dn1 / one_minus_c,
            8.0 * dn1,
            Relation::LessEq,
            logd,
        ));
        links.push(link("8δ^(n+1) < 8δ^n", 8.0 * dn1, 8.0 * dn, Relation::Less, false));
        if let Some(m) = p.m {
            links.push(link("8δ^n <= 1/(2M)", 8.0 * dn, 0.5 / m, Relation::LessEq, false));
        }

        let two_dn = 2.0 * dn;
        let eq2_mid = if two_dn < 1.0 { two_dn / (1.0 - two_dn) } else { f64::INFINITY };
        if p.mode == Mode::DeltaChain {
            links.push(link("d/(c-d) = 2δ^n/(1-2δ^n)", inner, eq2_mid, Relation::Equal, logd));
        } else {
            links.push(link("d/(c-d) <= 4δ^n", inner, 4.0 * dn, Relation::LessEq, logd));
        }
        links.push(link("2δ^n/(1-2δ^n) <= 4δ^n", eq2_mid, 4.0 * dn, Relation::LessEq, false));
        if let Some(m) = p.m {
            links.push(link("4δ^n < 1/(2M)", 4.0 * dn, 0.5 / m, Relation::Less, false));
        }
    }

    let pass = links.iter().all(|l| l.pass);
    ValidationReport { links, pass }
}
