//! Direction sets of point sets and function graphs in AG(2,q).
//!
//! The direction set of a point set U collects every slope
//! (y_j−y_i)/(x_j−x_i) over pairs of distinct points, with the vertical
//! direction tracked separately as an `infinity` flag rather than an
//! element code. Function graphs never determine the vertical direction.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::field::{Elem, FieldCtx};
use crate::sets::{Bitset, MulSet};
use crate::{Error, Result};

/// A function F_q → F_q as a dense value table indexed by element code.
#[derive(Debug, Clone)]
pub struct FuncTable {
    ctx: Arc<FieldCtx>,
    values: Vec<Elem>,
}

impl PartialEq for FuncTable {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.id() == other.ctx.id() && self.values == other.values
    }
}
impl Eq for FuncTable {}

impl FuncTable {
    pub fn new(ctx: &Arc<FieldCtx>, values: Vec<Elem>) -> Result<Self> {
        let q = ctx.q();
        if values.len() != q as usize {
            return Err(Error::Parse(format!(
                "function table must have exactly q = {q} entries, got {}",
                values.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= q) {
            return Err(Error::InvalidElement(bad));
        }
        Ok(FuncTable { ctx: Arc::clone(ctx), values })
    }

    /// Build a table from a closure over codes.
    pub fn from_fn(ctx: &Arc<FieldCtx>, f: impl Fn(Elem) -> Elem) -> Result<Self> {
        let values = (0..ctx.q()).map(f).collect();
        FuncTable::new(ctx, values)
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn values(&self) -> &[Elem] {
        &self.values
    }

    pub fn eval(&self, x: Elem) -> Elem {
        self.values[x as usize]
    }
}

/// Serialized form of a function table: `{"p":…,"n":…,"values":[…]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuncTableFile {
    pub p: u32,
    pub n: u32,
    pub values: Vec<Elem>,
}

/// A set of distinct points in AG(2,q), coordinates as element codes.
#[derive(Debug, Clone)]
pub struct PointSet {
    ctx: Arc<FieldCtx>,
    points: Vec<(Elem, Elem)>,
}

impl PointSet {
    pub fn new(ctx: &Arc<FieldCtx>, points: Vec<(Elem, Elem)>) -> Result<Self> {
        let q = ctx.q();
        let mut seen = std::collections::HashSet::new();
        for &(x, y) in &points {
            if x >= q {
                return Err(Error::InvalidElement(x));
            }
            if y >= q {
                return Err(Error::InvalidElement(y));
            }
            if !seen.insert((x, y)) {
                return Err(Error::DuplicatePoint);
            }
        }
        Ok(PointSet { ctx: Arc::clone(ctx), points })
    }

    pub fn points(&self) -> &[(Elem, Elem)] {
        &self.points
    }
}

/// A subset of F_q ∪ {∞}: finite directions as a bitset plus a flag.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    ctx: Arc<FieldCtx>,
    bits: Bitset,
    has_infinity: bool,
}

impl PartialEq for DirectionSet {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.id() == other.ctx.id()
            && self.bits == other.bits
            && self.has_infinity == other.has_infinity
    }
}
impl Eq for DirectionSet {}

impl DirectionSet {
    fn new(ctx: &Arc<FieldCtx>) -> Self {
        DirectionSet {
            ctx: Arc::clone(ctx),
            bits: Bitset::new(ctx.q() as usize),
            has_infinity: false,
        }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn contains(&self, d: Elem) -> bool {
        self.bits.get(d as usize)
    }

    pub fn has_infinity(&self) -> bool {
        self.has_infinity
    }

    /// Number of directions, counting ∞.
    pub fn len(&self) -> usize {
        self.bits.count() + usize::from(self.has_infinity)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorted finite direction codes.
    pub fn codes(&self) -> Vec<Elem> {
        self.bits.iter_ones().map(|i| i as Elem).collect()
    }

    pub fn bits(&self) -> &Bitset {
        &self.bits
    }

    /// View as a multiplicative set. Fails if ∞ or 0 is a direction.
    pub fn as_mul_set(&self) -> Result<MulSet> {
        if self.has_infinity || self.bits.get(0) {
            return Err(Error::InvalidElement(0));
        }
        Ok(MulSet::from_bits(&self.ctx, self.bits.clone()))
    }

    /// All finite directions lie in `d` and ∞ is absent.
    pub fn within(&self, d: &MulSet) -> bool {
        !self.has_infinity && self.bits.is_subset_of(d.bits())
    }
}

/// Directions determined by a point set, vertical pairs giving ∞.
pub fn directions_of_points(u: &PointSet) -> Result<DirectionSet> {
    if u.points.len() < 2 {
        return Err(Error::TooFewPoints);
    }
    let ctx = &u.ctx;
    let mut out = DirectionSet::new(ctx);
    for (i, &(xi, yi)) in u.points.iter().enumerate() {
        for &(xj, yj) in &u.points[i + 1..] {
            if xi == xj {
                out.has_infinity = true;
            } else {
                let slope = ctx
                    .div(ctx.sub(yj, yi), ctx.sub(xj, xi))
                    .expect("x_i != x_j");
                out.bits.set(slope as usize);
            }
        }
    }
    Ok(out)
}

/// Directions of the graph {(x, f(x))}. Never contains ∞.
///
/// ```
/// use dirlab::directions::{directions_of_function, FuncTable};
/// use dirlab::field::{build_field, FieldSpec};
///
/// let f9 = build_field(FieldSpec::new(3, 2))?;
/// let cube = FuncTable::from_fn(&f9, |x| f9.pow(x, 3).unwrap())?;
/// let dirs = directions_of_function(&cube);
/// assert_eq!(dirs.codes(), vec![1, 2, 3, 6]);
/// assert!(!dirs.has_infinity());
/// # Ok::<(), dirlab::Error>(())
/// ```
pub fn directions_of_function(f: &FuncTable) -> DirectionSet {
    let ctx = &f.ctx;
    let q = ctx.q();
    let mut out = DirectionSet::new(ctx);
    let mut count = 0usize;
    'outer: for x in 0..q {
        for y in x + 1..q {
            let slope = ctx
                .div(ctx.sub(f.values[y as usize], f.values[x as usize]), ctx.sub(y, x))
                .expect("y != x");
            if !out.bits.get(slope as usize) {
                out.bits.set(slope as usize);
                count += 1;
                if count == q as usize {
                    break 'outer; // all directions hit
                }
            }
        }
    }
    out
}

/// Im(f(x)/x) over x ∈ F_q^*, as a direction set without ∞.
///
/// Requires f(0) = 0. Coincides with the direction set exactly when f is
/// additive.
pub fn image_ratio_set(f: &FuncTable) -> Result<DirectionSet> {
    if f.values[0] != 0 {
        return Err(Error::NonzeroAtOrigin);
    }
    let ctx = &f.ctx;
    let mut out = DirectionSet::new(ctx);
    for x in 1..ctx.q() {
        let r = ctx.div(f.values[x as usize], x).expect("x nonzero");
        out.bits.set(r as usize);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{build_field, FieldSpec};

    fn f(p: u32, n: u32) -> Arc<FieldCtx> {
        build_field(FieldSpec::new(p, n)).unwrap()
    }

    /// Pairwise oracle that recomputes every slope the slow way.
    fn oracle(ctx: &Arc<FieldCtx>, pts: &[(Elem, Elem)]) -> (Vec<Elem>, bool) {
        let mut dirs = std::collections::BTreeSet::new();
        let mut inf = false;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (xi, yi) = pts[i];
                let (xj, yj) = pts[j];
                if xi == xj {
                    inf = true;
                } else {
                    dirs.insert(ctx.div(ctx.sub(yj, yi), ctx.sub(xj, xi)).unwrap());
                }
            }
        }
        (dirs.into_iter().collect(), inf)
    }

    #[test]
    fn point_set_examples() {
        let f5 = f(5, 1);
        let u = PointSet::new(&f5, vec![(0, 0), (1, 2), (2, 4)]).unwrap();
        let d = directions_of_points(&u).unwrap();
        assert_eq!(d.codes(), vec![2]);
        assert!(!d.has_infinity());

        let u = PointSet::new(&f5, vec![(0, 0), (0, 1)]).unwrap();
        let d = directions_of_points(&u).unwrap();
        assert!(d.codes().is_empty());
        assert!(d.has_infinity());
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn graph_of_square_over_gf4() {
        let f4 = f(2, 2);
        let tbl = FuncTable::from_fn(&f4, |x| f4.mul(x, x)).unwrap();
        let pts: Vec<(Elem, Elem)> = (0..4).map(|x| (x, tbl.eval(x))).collect();
        let (expect, inf) = oracle(&f4, &pts);
        assert!(!inf);
        assert_eq!(expect, vec![1, 2, 3]);
        let d = directions_of_function(&tbl);
        assert_eq!(d.codes(), expect);
        assert!(!d.has_infinity());
        // agrees with the generic point-set path
        let u = PointSet::new(&f4, pts).unwrap();
        assert_eq!(directions_of_points(&u).unwrap(), d);
    }

    #[test]
    fn identity_and_affine() {
        let f7 = f(7, 1);
        let id = FuncTable::from_fn(&f7, |x| x).unwrap();
        assert_eq!(directions_of_function(&id).codes(), vec![1]);
        // |D_f| = 1 iff affine-linear
        for a in 1..7 {
            for b in 0..7 {
                let t = FuncTable::from_fn(&f7, |x| f7.add(f7.mul(a, x), b)).unwrap();
                assert_eq!(directions_of_function(&t).codes(), vec![a]);
            }
        }
        let sq = FuncTable::from_fn(&f7, |x| f7.mul(x, x)).unwrap();
        assert!(directions_of_function(&sq).len() > 1);
    }

    #[test]
    fn cube_over_gf9_gives_squares() {
        let f9 = f(3, 2);
        let cube = FuncTable::from_fn(&f9, |x| f9.pow(x, 3).unwrap()).unwrap();
        let d = directions_of_function(&cube);
        assert_eq!(d.codes(), vec![1, 2, 3, 6]);
        let im = image_ratio_set(&cube).unwrap();
        assert_eq!(im, d);
    }

    #[test]
    fn square_over_gf5_by_oracle() {
        let f5 = f(5, 1);
        let sq = FuncTable::new(&f5, vec![0, 1, 4, 4, 1]).unwrap();
        let pts: Vec<(Elem, Elem)> = (0..5).map(|x| (x, sq.eval(x))).collect();
        let (expect, _) = oracle(&f5, &pts);
        assert_eq!(directions_of_function(&sq).codes(), expect);
        // x^2 over GF(5) determines every direction
        assert_eq!(expect, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn image_ratio_examples() {
        let f7 = f(7, 1);
        for a in 1..7 {
            let t = FuncTable::from_fn(&f7, |x| f7.mul(a, x)).unwrap();
            assert_eq!(image_ratio_set(&t).unwrap().codes(), vec![a]);
        }
        let bad = FuncTable::from_fn(&f7, |x| f7.add(x, 1)).unwrap();
        assert!(matches!(image_ratio_set(&bad), Err(Error::NonzeroAtOrigin)));
    }

    #[test]
    fn image_ratio_differs_for_non_additive() {
        // f(0)=0, f(x)=1 elsewhere over GF(4): ratios are inverses, but the
        // graph also determines the 0 direction from pairs with equal values.
        let f4 = f(2, 2);
        let t = FuncTable::new(&f4, vec![0, 1, 1, 1]).unwrap();
        let im = image_ratio_set(&t).unwrap();
        let mut expect: Vec<Elem> = (1..4).map(|x| f4.inv(x).unwrap()).collect();
        expect.sort_unstable();
        expect.dedup();
        assert_eq!(im.codes(), expect);
        let d = directions_of_function(&t);
        assert_ne!(d, im);
        assert!(d.contains(0));
    }

    #[test]
    fn affine_invariance() {
        let f9 = f(3, 2);
        let base = FuncTable::from_fn(&f9, |x| f9.pow(x, 3).unwrap()).unwrap();
        let d0 = directions_of_function(&base);
        for c in 0..9 {
            let shifted = FuncTable::from_fn(&f9, |x| f9.add(base.eval(x), c)).unwrap();
            assert_eq!(directions_of_function(&shifted), d0);
        }
        // translated point sets
        let pts: Vec<(Elem, Elem)> = (0..9).map(|x| (x, base.eval(x))).collect();
        let u = PointSet::new(&f9, pts.clone()).unwrap();
        let du = directions_of_points(&u).unwrap();
        for (s, t) in [(1u32, 5u32), (4, 7)] {
            let moved: Vec<(Elem, Elem)> =
                pts.iter().map(|&(x, y)| (f9.add(x, s), f9.add(y, t))).collect();
            let v = PointSet::new(&f9, moved).unwrap();
            assert_eq!(directions_of_points(&v).unwrap(), du);
        }
    }

    #[test]
    fn quotient_condition_bridge() {
        // D_f ⊆ D and no ∞ is exactly the difference-quotient condition.
        let f5 = f(5, 1);
        let d = MulSet::from_codes(&f5, &[1, 4]).unwrap();
        let good = FuncTable::from_fn(&f5, |x| f5.mul(4, x)).unwrap();
        assert!(directions_of_function(&good).within(&d));
        let bad = FuncTable::from_fn(&f5, |x| f5.mul(2, x)).unwrap();
        assert!(!directions_of_function(&bad).within(&d));
    }

    #[test]
    fn error_paths() {
        let f5 = f(5, 1);
        let u = PointSet::new(&f5, vec![(0, 0)]).unwrap();
        assert!(matches!(directions_of_points(&u), Err(Error::TooFewPoints)));
        assert!(matches!(
            PointSet::new(&f5, vec![(0, 0), (0, 0)]),
            Err(Error::DuplicatePoint)
        ));
        assert!(PointSet::new(&f5, vec![(5, 0)]).is_err());
        assert!(FuncTable::new(&f5, vec![0, 1, 2]).is_err());
        assert!(FuncTable::new(&f5, vec![0, 1, 2, 3, 9]).is_err());
    }
}
