//! Every Hamiltonian form of the inhomogeneous chain, and exact proofs that
//! they coincide.
//!
//! All builders take the lattice spacing as a [`ScalarExpr`](Expr), normally
//! the parameter `a`, and return operators in normal form. Identities are
//! decided by [`op_equal`] on canonical coefficients, so a passing check holds
//! identically in every symbolic parameter (α, γ, a) and for every profile.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use thiserror::Error;

use crate::diffop::{op_equal, LinDiffOp, OpVerdict, WordToken};
use crate::symexpr::{canonicalize, differentiate, Exponent, Expr, ExprError, FuncName, FuncSym};

/// Default name of the lattice-spacing parameter.
pub const SPACING: &str = "a";
pub const ALPHA: &str = "alpha";
pub const GAMMA: &str = "gamma";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HamiltonianError {
    #[error("ordering exponent `{0}` must be a rational number or affine in parameters")]
    NonAffineOrdering(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn j(order: u32) -> Expr {
    Expr::func(FuncName::J, order)
}

fn eps() -> Expr {
    Expr::func(FuncName::Eps, 0)
}

fn half() -> Expr {
    Expr::ratio(1, 2)
}

fn sq(a: &Expr) -> Expr {
    Expr::powi(a.clone(), 2)
}

/// Von Roos exponents. β is derived as `1 - α - γ`, so the constraint
/// `α + β + γ = 1` cannot be violated.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingParams {
    alpha: Expr,
    gamma: Expr,
}

impl OrderingParams {
    pub fn new(alpha: Expr, gamma: Expr) -> Result<Self, HamiltonianError> {
        for e in [&alpha, &gamma] {
            if Exponent::from_expr(e).is_none() {
                return Err(HamiltonianError::NonAffineOrdering(e.to_string()));
            }
        }
        Ok(OrderingParams { alpha, gamma })
    }

    /// Free parameters `alpha` and `gamma`.
    pub fn symbolic() -> Self {
        OrderingParams { alpha: Expr::param(ALPHA), gamma: Expr::param(GAMMA) }
    }

    pub fn rational(alpha: BigRational, gamma: BigRational) -> Self {
        OrderingParams { alpha: Expr::Const(alpha), gamma: Expr::Const(gamma) }
    }

    pub fn alpha(&self) -> &Expr {
        &self.alpha
    }

    pub fn gamma(&self) -> &Expr {
        &self.gamma
    }

    pub fn beta(&self) -> Expr {
        Expr::add(vec![Expr::one(), Expr::neg(self.alpha.clone()), Expr::neg(self.gamma.clone())])
    }

    fn exponent(e: &Expr) -> Exponent {
        Exponent::from_expr(e).expect("validated at construction")
    }

    /// The triple `(J^α, J^β, J^γ)`.
    pub fn as_triple(&self) -> FactorTriple {
        let pw = |e: &Expr| Expr::pow(j(0), Self::exponent(e));
        FactorTriple::new(pw(&self.alpha), pw(&self.beta()), pw(&self.gamma))
    }
}

impl fmt::Display for OrderingParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alpha = {}, beta = {}, gamma = {}", self.alpha, self.beta(), self.gamma)
    }
}

/// Factorization `J = J1 J2 J3`. The product defines `J` wherever the triple
/// is consumed; it is never checked against an independent `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTriple {
    pub j1: Expr,
    pub j2: Expr,
    pub j3: Expr,
}

impl FactorTriple {
    pub fn new(j1: Expr, j2: Expr, j3: Expr) -> Self {
        FactorTriple { j1, j2, j3 }
    }

    /// Abstract symbols `J1, J2, J3`.
    pub fn abstract_symbols() -> Self {
        FactorTriple::new(
            Expr::func(FuncName::J1, 0),
            Expr::func(FuncName::J2, 0),
            Expr::func(FuncName::J3, 0),
        )
    }

    pub fn product(&self) -> Expr {
        Expr::mul(vec![self.j1.clone(), self.j2.clone(), self.j3.clone()])
    }

    /// `J1 (J2 J3')' + J3 (J2 J1')'`.
    pub fn correction(&self) -> Expr {
        let inner = |outer: &Expr, mid: &Expr, last: &Expr| {
            let d = differentiate(&Expr::mul(vec![mid.clone(), differentiate(last)]));
            Expr::mul(vec![outer.clone(), d])
        };
        Expr::add(vec![
            inner(&self.j1, &self.j2, &self.j3),
            inner(&self.j3, &self.j2, &self.j1),
        ])
    }
}

/// Position assigned to the hopping integral `J_i` between sites `i` and
/// `i+1`: `x_i`, `x_i + a`, or `x_i + a/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SiteConvention {
    #[default]
    Left,
    Right,
    Midpoint,
}

impl SiteConvention {
    /// Offset of the hopping position from `x_i`, in units of `a`.
    pub fn offset_fraction(self) -> f64 {
        match self {
            SiteConvention::Left => 0.0,
            SiteConvention::Right => 1.0,
            SiteConvention::Midpoint => 0.5,
        }
    }

    fn offset(self, a: &Expr) -> Expr {
        match self {
            SiteConvention::Left => Expr::zero(),
            SiteConvention::Right => a.clone(),
            SiteConvention::Midpoint => Expr::mul(vec![half(), a.clone()]),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SiteConvention::Left => "left",
            SiteConvention::Right => "right",
            SiteConvention::Midpoint => "midpoint",
        }
    }
}

impl fmt::Display for SiteConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SiteConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(SiteConvention::Left),
            "right" => Ok(SiteConvention::Right),
            "midpoint" => Ok(SiteConvention::Midpoint),
            other => Err(format!("unknown site convention `{other}` (left, right, midpoint)")),
        }
    }
}

/// `(a²/2) J'' - a J' + 2J + ε` with `J` replaced by `jexpr`.
pub fn effective_potential_for(jexpr: &Expr, a: &Expr) -> Expr {
    let dj = differentiate(jexpr);
    let ddj = differentiate(&dj);
    Expr::add(vec![
        Expr::mul(vec![half(), sq(a), ddj]),
        Expr::mul(vec![Expr::int(-1), a.clone(), dj]),
        Expr::mul(vec![Expr::int(2), jexpr.clone()]),
        eps(),
    ])
}

/// `a² D∘J∘D + (a²/2) J'' - a J' + 2J + ε` with `J` replaced by `jexpr`.
pub fn effective_hamiltonian_for(jexpr: &Expr, a: &Expr) -> LinDiffOp {
    let kinetic = LinDiffOp::from_word(&[WordToken::D, WordToken::Mul(jexpr.clone()), WordToken::D]);
    kinetic
        .scale(&sq(a))
        .add(&LinDiffOp::multiplication(effective_potential_for(jexpr, a)))
}

/// The hermitian effective Hamiltonian of the chain, in normal form
/// `a²J D² + a²J' D + ((a²/2) J'' - a J' + 2J + ε)`.
pub fn effective_hamiltonian(a: &Expr) -> LinDiffOp {
    effective_hamiltonian_for(&j(0), a)
}

fn symmetrized_kinetic(f1: &Expr, f2: &Expr, f3: &Expr, a: &Expr) -> LinDiffOp {
    let word = |x: &Expr, y: &Expr, z: &Expr| {
        LinDiffOp::from_word(&[
            WordToken::Mul(x.clone()),
            WordToken::D,
            WordToken::Mul(y.clone()),
            WordToken::D,
            WordToken::Mul(z.clone()),
        ])
    };
    word(f1, f2, f3)
        .add(&word(f3, f2, f1))
        .scale(&Expr::mul(vec![half(), sq(a)]))
}

/// `(a²/2) (J^α D J^β D J^γ + J^γ D J^β D J^α)`.
pub fn vonroos_kinetic(p: &OrderingParams, a: &Expr) -> LinDiffOp {
    let t = p.as_triple();
    symmetrized_kinetic(&t.j1, &t.j2, &t.j3, a)
}

/// `(a²/2)(1-α-γ) J'' + a² αγ (J')²/J - a J' + 2J + ε`.
pub fn vonroos_potential(p: &OrderingParams, a: &Expr) -> Expr {
    let alpha = p.alpha().clone();
    let gamma = p.gamma().clone();
    Expr::add(vec![
        Expr::mul(vec![half(), sq(a), p.beta(), j(2)]),
        Expr::mul(vec![sq(a), alpha, gamma, Expr::powi(j(1), 2), Expr::powi(j(0), -1)]),
        Expr::mul(vec![Expr::int(-1), a.clone(), j(1)]),
        Expr::mul(vec![Expr::int(2), j(0)]),
        eps(),
    ])
}

/// `(a²/2) (J1 D J2 D J3 + J3 D J2 D J1)`.
pub fn general_kinetic(t: &FactorTriple, a: &Expr) -> LinDiffOp {
    symmetrized_kinetic(&t.j1, &t.j2, &t.j3, a)
}

/// Effective potential for `J = J1 J2 J3` minus `(a²/2)[J1(J2 J3')' + J3(J2 J1')']`.
pub fn general_potential(t: &FactorTriple, a: &Expr) -> Expr {
    Expr::add(vec![
        effective_potential_for(&t.product(), a),
        Expr::mul(vec![Expr::ratio(-1, 2), sq(a), t.correction()]),
    ])
}

/// Continuum operator re-derived from the site recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceReport {
    pub convention: SiteConvention,
    pub operator: LinDiffOp,
    /// The part of the operator linear in the spacing; it is a pure
    /// multiplication term.
    pub first_order_term: Expr,
    /// Terms of this order in the spacing and above were discarded.
    pub truncation_order: u32,
    pub discarded_terms: usize,
}

/// Second-order Taylor expansion of `J` about `x` at offset `t`.
fn taylor_j(t: &Expr) -> Expr {
    Expr::add(vec![
        j(0),
        Expr::mul(vec![t.clone(), j(1)]),
        Expr::mul(vec![half(), sq(t), j(2)]),
    ])
}

/// Substitutes Taylor expansions of `c_{i±1} = ψ(x ± a)` and of the hopping
/// integrals into `J_i c_{i+1} + J_{i-1} c_{i-1} + ε_i c_i`, keeps terms up
/// to `a²` and collects by derivative order of `ψ`.
///
/// `spacing` must name the parameter playing the role of `a`.
pub fn expand_recurrence(convention: SiteConvention, spacing: &str) -> Result<RecurrenceReport, ExprError> {
    let a = Expr::param(spacing);
    let psi = |k: u32| Expr::func(FuncName::Psi, k);
    let neighbour = |sign: i64| {
        Expr::add(vec![
            psi(0),
            Expr::mul(vec![Expr::int(sign), a.clone(), psi(1)]),
            Expr::mul(vec![half(), sq(&a), psi(2)]),
        ])
    };
    let shift = convention.offset(&a);
    let hop_here = taylor_j(&shift);
    let hop_before = taylor_j(&Expr::sub(shift.clone(), a.clone()));
    let lhs = Expr::add(vec![
        Expr::mul(vec![hop_here, neighbour(1)]),
        Expr::mul(vec![hop_before, neighbour(-1)]),
        Expr::mul(vec![eps(), psi(0)]),
    ]);
    let full = canonicalize(&lhs)?;

    const KEEP: u32 = 2;
    let mut kept = crate::symexpr::CanonicalPoly::zero();
    let mut discarded_terms = 0;
    for d in 0..=full.max_degree(spacing) {
        let part = full.degree_part(spacing, d);
        if d <= KEEP {
            kept = kept.add(&part);
        } else {
            discarded_terms += part.terms().values().map(|c| c.terms().len()).sum::<usize>();
        }
    }

    let collect = |poly: &crate::symexpr::CanonicalPoly| -> Result<LinDiffOp, ExprError> {
        let mut rest = poly.clone();
        let mut terms = Vec::new();
        for k in 0..=2 {
            let (cofactor, remainder) = rest.split_linear(FuncSym::new(FuncName::Psi, k));
            terms.push((k, cofactor.to_expr()));
            rest = remainder;
        }
        if !rest.is_zero() {
            return Err(ExprError::Fragment { node: rest.to_string() });
        }
        Ok(LinDiffOp::from_terms(terms))
    };

    let operator = collect(&kept)?;
    let first = collect(&kept.degree_part(spacing, 1))?;
    debug_assert!(first.coefficients().keys().all(|k| *k == 0));
    Ok(RecurrenceReport {
        convention,
        operator,
        first_order_term: first.coefficient(0),
        truncation_order: KEEP + 1,
        discarded_terms,
    })
}

/// Result of an operator identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofReport {
    pub lhs: LinDiffOp,
    pub rhs: LinDiffOp,
    pub verdict: OpVerdict,
}

impl ProofReport {
    fn decide(lhs: LinDiffOp, rhs: LinDiffOp) -> Result<Self, ExprError> {
        let verdict = op_equal(&lhs, &rhs, None)?;
        Ok(ProofReport { lhs, rhs, verdict })
    }

    /// Holds exactly, by canonical difference.
    pub fn holds(&self) -> bool {
        self.verdict.equal && self.verdict.is_exact()
    }
}

/// `T(α,β,γ) + U(α,β,γ) = H_eff`, decided identically in α and γ.
pub fn verify_vonroos_invariance(p: &OrderingParams) -> Result<ProofReport, ExprError> {
    let a = Expr::param(SPACING);
    let lhs = vonroos_kinetic(p, &a).add(&LinDiffOp::multiplication(vonroos_potential(p, &a)));
    ProofReport::decide(lhs, effective_hamiltonian(&a))
}

/// `T_G + U_G = H_eff` with `J = J1 J2 J3`.
pub fn verify_general_invariance(t: &FactorTriple) -> Result<ProofReport, ExprError> {
    let a = Expr::param(SPACING);
    let lhs = general_kinetic(t, &a).add(&LinDiffOp::multiplication(general_potential(t, &a)));
    ProofReport::decide(lhs, effective_hamiltonian_for(&t.product(), &a))
}

/// Compares an operator with its formal adjoint.
pub fn check_self_adjoint(op: &LinDiffOp) -> Result<OpVerdict, ExprError> {
    op_equal(op, &op.formal_adjoint(), None)
}

/// Deliberate defects used to show the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Removes `-aJ'` from the hermitian effective Hamiltonian.
    DropFirstOrderShift,
    /// Removes `a²αγ(J')²/J` from the von Roos potential.
    DropOrderingCrossTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub ordering: OrderingParams,
    pub triple: FactorTriple,
    pub convention: SiteConvention,
    pub mutation: Option<Mutation>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            ordering: OrderingParams::symbolic(),
            triple: FactorTriple::abstract_symbols(),
            convention: SiteConvention::Left,
            mutation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedCheck {
    pub name: &'static str,
    pub report: ProofReport,
    pub note: Option<String>,
}

impl NamedCheck {
    pub fn passed(&self) -> bool {
        self.report.holds()
    }
}

pub const CHECK_NAMES: [&str; 6] = [
    "hermitization",
    "vonroos-expansion",
    "vonroos-invariance",
    "general-expansion",
    "general-invariance",
    "recurrence-vs-hermitian",
];

/// Runs the six named identity checks.
pub fn verification_suite(opts: &SuiteOptions) -> Result<Vec<NamedCheck>, ExprError> {
    let a = Expr::param(SPACING);
    let p = &opts.ordering;
    let t = &opts.triple;
    let mut h_eff = effective_hamiltonian(&a);
    if opts.mutation == Some(Mutation::DropFirstOrderShift) {
        h_eff = h_eff.add(&LinDiffOp::multiplication(Expr::mul(vec![a.clone(), j(1)])));
    }
    let mut potential = vonroos_potential(p, &a);
    if opts.mutation == Some(Mutation::DropOrderingCrossTerm) {
        let cross = Expr::mul(vec![
            sq(&a),
            p.alpha().clone(),
            p.gamma().clone(),
            Expr::powi(j(1), 2),
            Expr::powi(j(0), -1),
        ]);
        potential = Expr::sub(potential, cross);
    }
    let base_kinetic = LinDiffOp::from_terms([(2, j(0)), (1, j(1))]);

    let mut out = Vec::with_capacity(CHECK_NAMES.len());
    let mut push = |name: &'static str, lhs: LinDiffOp, rhs: LinDiffOp, note: Option<String>| {
        ProofReport::decide(lhs, rhs).map(|report| out.push(NamedCheck { name, report, note }))
    };

    push(
        CHECK_NAMES[0],
        LinDiffOp::from_word(&[WordToken::D, WordToken::Mul(j(0)), WordToken::D]),
        base_kinetic.clone(),
        None,
    )?;

    let vr_closed = base_kinetic
        .add(&LinDiffOp::multiplication(Expr::add(vec![
            Expr::mul(vec![half(), Expr::add(vec![p.alpha().clone(), p.gamma().clone()]), j(2)]),
            Expr::mul(vec![
                Expr::int(-1),
                p.alpha().clone(),
                p.gamma().clone(),
                Expr::powi(j(1), 2),
                Expr::powi(j(0), -1),
            ]),
        ])))
        .scale(&sq(&a));
    let kinetic = vonroos_kinetic(p, &a);
    push(CHECK_NAMES[1], kinetic.clone(), vr_closed, None)?;

    push(
        CHECK_NAMES[2],
        kinetic.add(&LinDiffOp::multiplication(potential)),
        h_eff.clone(),
        None,
    )?;

    let jt = t.product();
    let g_closed = LinDiffOp::from_terms([(2, jt.clone()), (1, differentiate(&jt))])
        .scale(&sq(&a))
        .add(&LinDiffOp::multiplication(Expr::mul(vec![half(), sq(&a), t.correction()])));
    let g_kinetic = general_kinetic(t, &a);
    push(CHECK_NAMES[3], g_kinetic.clone(), g_closed, None)?;

    let mut g_eff = effective_hamiltonian_for(&jt, &a);
    if opts.mutation == Some(Mutation::DropFirstOrderShift) {
        g_eff = g_eff.add(&LinDiffOp::multiplication(Expr::mul(vec![a.clone(), differentiate(&jt)])));
    }
    push(
        CHECK_NAMES[4],
        g_kinetic.add(&LinDiffOp::multiplication(general_potential(t, &a))),
        g_eff,
        None,
    )?;

    let rec = expand_recurrence(opts.convention, SPACING)?;
    let mut note = format!(
        "convention = {}, first-order term = {}, dropped O({}^{}) ({} terms)",
        rec.convention, rec.first_order_term, SPACING, rec.truncation_order, rec.discarded_terms
    );
    if opts.convention != SiteConvention::Left {
        note.push_str("; deviates from the hermitian form, which corresponds to the left convention");
    }
    push(CHECK_NAMES[5], rec.operator, h_eff, Some(note))?;

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse_expr;

    fn e(t: &str) -> Expr {
        parse_expr(t).unwrap()
    }

    fn a() -> Expr {
        Expr::param(SPACING)
    }

    fn ops(pairs: &[(u32, &str)]) -> LinDiffOp {
        LinDiffOp::from_terms(pairs.iter().map(|(k, t)| (*k, e(t))))
    }

    fn exact_eq(x: &LinDiffOp, y: &LinDiffOp) -> bool {
        let v = op_equal(x, y, None).unwrap();
        v.is_exact() && v.equal
    }

    fn ordering(alpha: &str, gamma: &str) -> OrderingParams {
        OrderingParams::new(e(alpha), e(gamma)).unwrap()
    }

    #[test]
    fn effective_hamiltonian_normal_form() {
        let h = effective_hamiltonian(&a());
        let want = ops(&[
            (2, "a^2*J"),
            (1, "a^2*J'"),
            (0, "(1/2)*a^2*J'' - a*J' + 2*J + eps"),
        ]);
        assert!(exact_eq(&h, &want));
    }

    #[test]
    fn uniform_limit() {
        // J' = J'' = 0
        let h = effective_hamiltonian(&a());
        let flat: Vec<(u32, Expr)> = h
            .coefficients()
            .iter()
            .map(|(k, c)| (*k, replace_derivatives_with_zero(c)))
            .collect();
        let flat = LinDiffOp::from_terms(flat);
        assert!(exact_eq(&flat, &ops(&[(2, "a^2*J"), (0, "2*J + eps")])));
    }

    fn replace_derivatives_with_zero(c: &Expr) -> Expr {
        match c {
            Expr::Func(s) if s.name == FuncName::J && s.order > 0 => Expr::zero(),
            Expr::Sum(v) => Expr::add(v.iter().map(replace_derivatives_with_zero).collect()),
            Expr::Product(v) => Expr::mul(v.iter().map(replace_derivatives_with_zero).collect()),
            Expr::Pow(b, x) => Expr::pow(replace_derivatives_with_zero(b), x.clone()),
            other => other.clone(),
        }
    }

    #[test]
    fn effective_hamiltonian_is_self_adjoint() {
        assert!(check_self_adjoint(&effective_hamiltonian(&a())).unwrap().equal);
    }

    #[test]
    fn vonroos_beta_one_is_divergence_form() {
        let t = vonroos_kinetic(&ordering("0", "0"), &a());
        assert!(exact_eq(&t, &ops(&[(2, "a^2*J"), (1, "a^2*J'")])));
    }

    #[test]
    fn vonroos_alpha_one() {
        let t = vonroos_kinetic(&ordering("1", "0"), &a());
        // (a²/2)(J D² + D² J) = (a²/2)(2J D² + 2J' D + J'')
        let want = ops(&[(2, "a^2*J"), (1, "a^2*J'"), (0, "(1/2)*a^2*J''")]);
        assert!(exact_eq(&t, &want));
    }

    #[test]
    fn vonroos_symbolic_closed_form() {
        let t = vonroos_kinetic(&OrderingParams::symbolic(), &a());
        let want = ops(&[
            (2, "a^2*J"),
            (1, "a^2*J'"),
            (0, "a^2*((1/2)*(alpha+gamma)*J'' - alpha*gamma*J'^2/J)"),
        ]);
        assert!(exact_eq(&t, &want));
    }

    #[test]
    fn vonroos_potential_examples() {
        let check = |p: OrderingParams, want: &str| {
            let got = canonicalize(&vonroos_potential(&p, &a())).unwrap();
            assert_eq!(got, canonicalize(&e(want)).unwrap());
        };
        check(ordering("0", "0"), "(1/2)*a^2*J'' - a*J' + 2*J + eps");
        check(ordering("1", "0"), "-a*J' + 2*J + eps");
        check(ordering("1/2", "1/2"), "a^2*J'^2/(4*J) - a*J' + 2*J + eps");
    }

    #[test]
    fn general_kinetic_specializes_to_vonroos() {
        let p = OrderingParams::symbolic();
        let g = general_kinetic(&p.as_triple(), &a());
        assert!(exact_eq(&g, &vonroos_kinetic(&p, &a())));
    }

    #[test]
    fn general_kinetic_trivial_factors() {
        let t = FactorTriple::new(Expr::one(), e("J"), Expr::one());
        assert!(exact_eq(&general_kinetic(&t, &a()), &ops(&[(2, "a^2*J"), (1, "a^2*J'")])));
        let u = canonicalize(&general_potential(&t, &a())).unwrap();
        assert_eq!(u, canonicalize(&e("(1/2)*a^2*J'' - a*J' + 2*J + eps")).unwrap());
    }

    #[test]
    fn general_potential_for_leading_factor() {
        // triple (J, 1, 1): correction is J'', which cancels the J'' term
        let t = FactorTriple::new(e("J"), Expr::one(), Expr::one());
        assert_eq!(canonicalize(&t.correction()).unwrap(), canonicalize(&e("J''")).unwrap());
        let u = canonicalize(&general_potential(&t, &a())).unwrap();
        assert_eq!(u, canonicalize(&e("-a*J' + 2*J + eps")).unwrap());
        assert!(verify_general_invariance(&t).unwrap().holds());
    }

    #[test]
    fn invariance_proofs_hold() {
        assert!(verify_vonroos_invariance(&OrderingParams::symbolic()).unwrap().holds());
        assert!(verify_general_invariance(&FactorTriple::abstract_symbols()).unwrap().holds());
        let r = verify_general_invariance(&OrderingParams::symbolic().as_triple()).unwrap();
        assert!(r.holds());
        let vr = verify_vonroos_invariance(&OrderingParams::symbolic()).unwrap();
        assert_eq!(r.lhs, vr.lhs);
    }

    #[test]
    fn invariance_report_lists_zero_differences() {
        let r = verify_vonroos_invariance(&OrderingParams::symbolic()).unwrap();
        let diffs = r.verdict.differences();
        assert_eq!(diffs.len(), 3);
        assert!(diffs.iter().all(|(_, d)| d.is_zero()));
    }

    #[test]
    fn recurrence_left_matches_effective() {
        let rep = expand_recurrence(SiteConvention::Left, SPACING).unwrap();
        assert!(exact_eq(&rep.operator, &effective_hamiltonian(&a())));
        assert_eq!(canonicalize(&rep.first_order_term).unwrap(), canonicalize(&e("-a*J'")).unwrap());
        assert_eq!(rep.truncation_order, 3);
        assert!(rep.discarded_terms > 0);
    }

    #[test]
    fn recurrence_other_conventions() {
        // right: J_i = J(x+a), J_{i-1} = J(x); the a¹ part is (2s - a) J' with s = a
        let right = expand_recurrence(SiteConvention::Right, SPACING).unwrap();
        assert_eq!(canonicalize(&right.first_order_term).unwrap(), canonicalize(&e("a*J'")).unwrap());
        // midpoint: s = a/2 kills the a¹ part; J'' weight (s² + (s-a)²)/2 = a²/4
        let mid = expand_recurrence(SiteConvention::Midpoint, SPACING).unwrap();
        assert!(mid.first_order_term.is_zero());
        let want = ops(&[(2, "a^2*J"), (1, "a^2*J'"), (0, "(1/4)*a^2*J'' + 2*J + eps")]);
        assert!(exact_eq(&mid.operator, &want));
    }

    #[test]
    fn kinetic_depends_on_ordering_only_through_sum_and_product() {
        let a = a();
        let t1 = vonroos_kinetic(&ordering("alpha", "gamma"), &a);
        let t2 = vonroos_kinetic(&ordering("gamma", "alpha"), &a);
        assert!(exact_eq(&t1, &t2));
        // (1/2, 0) and (0, 1/2): same sum, same product
        assert!(exact_eq(
            &vonroos_kinetic(&ordering("1/2", "0"), &a),
            &vonroos_kinetic(&ordering("0", "1/2"), &a)
        ));
        // (0,0) vs (1,0) differ in α+γ
        assert!(!op_equal(
            &vonroos_kinetic(&ordering("0", "0"), &a),
            &vonroos_kinetic(&ordering("1", "0"), &a),
            None
        )
        .unwrap()
        .equal);
        // (1/2,1/2) vs (1,0): same sum, different product
        assert!(!op_equal(
            &vonroos_kinetic(&ordering("1/2", "1/2"), &a),
            &vonroos_kinetic(&ordering("1", "0"), &a),
            None
        )
        .unwrap()
        .equal);
    }

    #[test]
    fn kinetic_forms_are_self_adjoint() {
        let a = a();
        assert!(check_self_adjoint(&vonroos_kinetic(&OrderingParams::symbolic(), &a)).unwrap().equal);
        assert!(check_self_adjoint(&general_kinetic(&FactorTriple::abstract_symbols(), &a)).unwrap().equal);
    }

    #[test]
    fn suite_default_passes_all_six() {
        let checks = verification_suite(&SuiteOptions::default()).unwrap();
        assert_eq!(checks.len(), 6);
        for c in &checks {
            assert!(c.passed(), "{} failed", c.name);
        }
    }

    #[test]
    fn suite_mutations_fail_named_checks() {
        let opts = SuiteOptions { mutation: Some(Mutation::DropFirstOrderShift), ..Default::default() };
        let checks = verification_suite(&opts).unwrap();
        let rec = checks.iter().find(|c| c.name == "recurrence-vs-hermitian").unwrap();
        assert!(!rec.passed());

        let opts = SuiteOptions { mutation: Some(Mutation::DropOrderingCrossTerm), ..Default::default() };
        let checks = verification_suite(&opts).unwrap();
        let inv = checks.iter().find(|c| c.name == "vonroos-invariance").unwrap();
        assert!(!inv.passed());
        assert!(checks.iter().find(|c| c.name == "hermitization").unwrap().passed());
    }

    #[test]
    fn suite_midpoint_flags_deviation() {
        let opts = SuiteOptions { convention: SiteConvention::Midpoint, ..Default::default() };
        let checks = verification_suite(&opts).unwrap();
        let rec = checks.iter().find(|c| c.name == "recurrence-vs-hermitian").unwrap();
        assert!(!rec.passed());
        let note = rec.note.as_deref().unwrap();
        assert!(note.contains("first-order term = 0"), "{note}");
        assert!(note.contains("deviates"));
    }

    #[test]
    fn rejects_non_affine_ordering() {
        assert!(OrderingParams::new(e("alpha*gamma"), e("0")).is_err());
        assert!(OrderingParams::new(e("x"), e("0")).is_err());
    }

    #[test]
    fn convention_parsing() {
        assert_eq!("midpoint".parse::<SiteConvention>().unwrap(), SiteConvention::Midpoint);
        assert!("center".parse::<SiteConvention>().is_err());
    }
}
