//! Linearized polynomials, Frobenius monomials, and the reciprocal
//! transform machinery.
//!
//! A linearized polynomial Σ α_j x^{p^j} is exactly an F_p-linear map on
//! F_q. Coefficient recovery solves the Moore-style system on the
//! polynomial basis by Gaussian elimination over F_q, then verifies the
//! candidate against the full value table, so the solver itself is not
//! load-bearing for correctness.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::directions::FuncTable;
use crate::field::{Elem, FieldCtx};
use crate::{Error, Result};

/// Coefficients (α_0, …, α_{n−1}) of Σ α_j x^{p^j}.
#[derive(Debug, Clone)]
pub struct LinPoly {
    ctx: Arc<FieldCtx>,
    coeffs: Vec<Elem>,
}

impl PartialEq for LinPoly {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.id() == other.ctx.id() && self.coeffs == other.coeffs
    }
}
impl Eq for LinPoly {}

impl LinPoly {
    pub fn new(ctx: &Arc<FieldCtx>, coeffs: Vec<Elem>) -> Result<Self> {
        if coeffs.len() != ctx.n() as usize {
            return Err(Error::Parse(format!(
                "linearized polynomial needs exactly n = {} coefficients",
                ctx.n()
            )));
        }
        if let Some(&bad) = coeffs.iter().find(|&&c| c >= ctx.q()) {
            return Err(Error::InvalidElement(bad));
        }
        Ok(LinPoly { ctx: Arc::clone(ctx), coeffs })
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    /// Value table of the map.
    pub fn table(&self) -> FuncTable {
        FuncTable::from_fn(&self.ctx, |x| lin_eval(self, x)).expect("values in range")
    }
}

/// Evaluate Σ α_j x^{p^j} at a point.
pub fn lin_eval(l: &LinPoly, x: Elem) -> Elem {
    let ctx = &l.ctx;
    let mut acc = 0;
    for (j, &a) in l.coeffs.iter().enumerate() {
        if a != 0 {
            let fx = ctx.frobenius(x, j as u32).expect("j < n");
            acc = ctx.add(acc, ctx.mul(a, fx));
        }
    }
    acc
}

/// The map x ↦ a·x^{p^j} + b with a ≠ 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusMonomial {
    pub a: Elem,
    pub j: u32,
    pub b: Elem,
}

impl FrobeniusMonomial {
    pub fn eval(&self, ctx: &FieldCtx, x: Elem) -> Elem {
        let fx = ctx.frobenius(x, self.j).expect("j < n");
        ctx.add(ctx.mul(self.a, fx), self.b)
    }

    pub fn table(&self, ctx: &Arc<FieldCtx>) -> FuncTable {
        let m = *self;
        FuncTable::from_fn(ctx, |x| m.eval(ctx, x)).expect("values in range")
    }
}

/// Recover linearized coefficients from a value table, or report that the
/// function is not additive.
///
/// Solves Σ_j α_j (p^i-basis elem)^{p^j} = f(basis elem) for the n basis
/// elements, then verifies the candidate on all q points. The zero
/// function is accepted (all coefficients zero).
pub fn detect_linearized(f: &FuncTable) -> Option<LinPoly> {
    let ctx = f.ctx();
    let n = ctx.n() as usize;
    if f.eval(0) != 0 {
        return None;
    }
    // augmented n x (n+1) matrix over F_q
    let mut m = vec![vec![0 as Elem; n + 1]; n];
    for (i, row) in m.iter_mut().enumerate() {
        let basis: Elem = ctx.p().pow(i as u32); // code of x^i
        for (j, cell) in row.iter_mut().take(n).enumerate() {
            *cell = ctx.frobenius(basis, j as u32).expect("j < n");
        }
        row[n] = f.eval(basis);
    }
    let coeffs = solve_linear(ctx, &mut m)?;
    let cand = LinPoly::new(ctx, coeffs).expect("n coefficients");
    // verification makes the solver non-load-bearing
    for x in 0..ctx.q() {
        if lin_eval(&cand, x) != f.eval(x) {
            return None;
        }
    }
    Some(cand)
}

/// Gaussian elimination over F_q on an augmented matrix; None if singular.
fn solve_linear(ctx: &FieldCtx, m: &mut [Vec<Elem>]) -> Option<Vec<Elem>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| m[r][col] != 0)?;
        m.swap(col, pivot);
        let inv = ctx.inv(m[col][col]).ok()?;
        for c in col..=n {
            m[col][c] = ctx.mul(m[col][c], inv);
        }
        for r in 0..n {
            if r != col && m[r][col] != 0 {
                let factor = m[r][col];
                for c in col..=n {
                    let sub = ctx.mul(factor, m[col][c]);
                    m[r][c] = ctx.sub(m[r][c], sub);
                }
            }
        }
    }
    Some(m.iter().map(|row| row[n]).collect())
}

/// Match a table against x ↦ a·x^{p^j} + b pointwise.
///
/// b = f(0), a = f(1) − b, and j is the smallest exponent whose table
/// matches, so the output is canonical.
///
/// ```
/// use dirlab::directions::FuncTable;
/// use dirlab::field::{build_field, FieldSpec};
/// use dirlab::linearized::detect_frobenius_monomial;
///
/// let f9 = build_field(FieldSpec::new(3, 2))?;
/// let cube = FuncTable::from_fn(&f9, |x| f9.pow(x, 3).unwrap())?;
/// let m = detect_frobenius_monomial(&cube).unwrap();
/// assert_eq!((m.a, m.j, m.b), (1, 1, 0));
/// # Ok::<(), dirlab::Error>(())
/// ```
pub fn detect_frobenius_monomial(f: &FuncTable) -> Option<FrobeniusMonomial> {
    let ctx = f.ctx();
    let b = f.eval(0);
    let a = ctx.sub(f.eval(1), b);
    if a == 0 {
        return None;
    }
    'j: for j in 0..ctx.n() {
        let cand = FrobeniusMonomial { a, j, b };
        for x in 0..ctx.q() {
            if cand.eval(ctx, x) != f.eval(x) {
                continue 'j;
            }
        }
        return Some(cand);
    }
    None
}

/// g(x) = 1/f(1/x) for x ≠ 0, g(0) = 0.
///
/// Needs f(0) = 0 and f nonvanishing away from 0. Applying the transform
/// twice restores f.
pub fn reciprocal_transform(f: &FuncTable) -> Result<FuncTable> {
    let ctx = f.ctx();
    if f.eval(0) != 0 {
        return Err(Error::NonzeroAtOrigin);
    }
    let mut values = vec![0 as Elem; ctx.q() as usize];
    for x in 1..ctx.q() {
        let fx_inv = f.eval(ctx.inv(x)?);
        if fx_inv == 0 {
            return Err(Error::ZeroValueAtNonzeroPoint(ctx.inv(x)?));
        }
        values[x as usize] = ctx.inv(fx_inv)?;
    }
    FuncTable::new(ctx, values)
}

/// Dense polynomial over F_q, constant term first, trailing coeff nonzero.
#[derive(Debug, Clone)]
pub struct DensePoly {
    ctx: Arc<FieldCtx>,
    coeffs: Vec<Elem>,
}

impl PartialEq for DensePoly {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.id() == other.ctx.id() && self.coeffs == other.coeffs
    }
}
impl Eq for DensePoly {}

impl DensePoly {
    pub fn new(ctx: &Arc<FieldCtx>, mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        DensePoly { ctx: Arc::clone(ctx), coeffs }
    }

    /// The monomial c·x^e.
    pub fn monomial(ctx: &Arc<FieldCtx>, c: Elem, e: usize) -> Self {
        if c == 0 {
            return DensePoly::new(ctx, vec![]);
        }
        let mut coeffs = vec![0; e + 1];
        coeffs[e] = c;
        DensePoly { ctx: Arc::clone(ctx), coeffs }
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &DensePoly) -> DensePoly {
        let ctx = &self.ctx;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                ctx.add(
                    self.coeffs.get(i).copied().unwrap_or(0),
                    other.coeffs.get(i).copied().unwrap_or(0),
                )
            })
            .collect();
        DensePoly::new(ctx, coeffs)
    }
}

/// Exact coefficient convolution over F_q.
pub fn poly_mul(a: &DensePoly, b: &DensePoly) -> DensePoly {
    let ctx = &a.ctx;
    if a.is_zero() || b.is_zero() {
        return DensePoly::new(ctx, vec![]);
    }
    let mut out = vec![0 as Elem; a.coeffs.len() + b.coeffs.len() - 1];
    for (i, &ai) in a.coeffs.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.coeffs.iter().enumerate() {
            out[i + j] = ctx.add(out[i + j], ctx.mul(ai, bj));
        }
    }
    DensePoly::new(ctx, out)
}

/// Outcome of the product-identity check on a coefficient pair.
#[derive(Debug, Clone)]
pub struct HIdentity {
    pub holds: bool,
    pub h: DensePoly,
}

/// Check that (Σ α_j x^{p^{n−1}−p^j}) · (Σ β_j x^{p^j−1}) equals the
/// monomial x^{p^{n−1}−1} as a coefficient vector.
///
/// The degree bound deg h ≤ 2(p^{n−1}−1) is asserted first: it is what
/// licenses comparing coefficients rather than values. For n = 1 both
/// factors are constants and the identity reduces to α_0 β_0 = 1.
pub fn h_identity_check(alpha: &LinPoly, beta: &LinPoly) -> Result<HIdentity> {
    if alpha.ctx.id() != beta.ctx.id() {
        return Err(Error::ContextMismatch);
    }
    let ctx = &alpha.ctx;
    let n = ctx.n();
    let top = (ctx.p() as usize).pow(n - 1); // p^{n-1}
    let mut left = DensePoly::new(ctx, vec![]);
    let mut right = DensePoly::new(ctx, vec![]);
    for j in 0..n as usize {
        let pj = (ctx.p() as usize).pow(j as u32);
        left = left.add(&DensePoly::monomial(ctx, alpha.coeffs[j], top - pj));
        right = right.add(&DensePoly::monomial(ctx, beta.coeffs[j], pj - 1));
    }
    let h = poly_mul(&left, &right);
    let degree_ok = h.degree().map(|d| d <= 2 * (top - 1)).unwrap_or(true);
    let target = DensePoly::monomial(ctx, 1, top - 1);
    let holds = degree_ok && h == target;
    Ok(HIdentity { holds, h })
}
