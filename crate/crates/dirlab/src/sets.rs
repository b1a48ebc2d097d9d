//! Multiplicative set algebra on subsets of F_q^*.
//!
//! A [`MulSet`] is a bitset over element codes with the zero bit never
//! set. Product sets run in log space: multiplying by a fixed element is
//! a rotation of the log-indexed bitmask, so `AB` costs O(|A| · q / 64)
//! word operations instead of the naive |A|·|B| element loop (which
//! survives only as a test oracle).

use std::sync::Arc;

use crate::field::{divisors, Elem, FieldCtx};
use crate::{Error, Result};

/// Fixed-length bitset with word-level rotate support.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bitset {
    len: usize,
    words: Vec<u64>,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Bitset { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn or_assign(&mut self, other: &Bitset) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn and_assign(&mut self, other: &Bitset) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn is_subset_of(&self, other: &Bitset) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Indices of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    fn mask_top(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// self |= src << shift, dropping bits that pass the end.
    fn or_shl(&mut self, src: &Bitset, shift: usize) {
        let nw = self.words.len();
        let (ws, bs) = (shift / 64, shift % 64);
        for i in (0..src.words.len()).rev() {
            let w = src.words[i];
            if w == 0 {
                continue;
            }
            if i + ws < nw {
                self.words[i + ws] |= w << bs;
            }
            if bs > 0 && i + ws + 1 < nw {
                self.words[i + ws + 1] |= w >> (64 - bs);
            }
        }
        self.mask_top();
    }

    /// self |= src >> shift.
    fn or_shr(&mut self, src: &Bitset, shift: usize) {
        let (ws, bs) = (shift / 64, shift % 64);
        for i in 0..src.words.len() {
            let w = src.words[i];
            if w == 0 || i < ws {
                continue;
            }
            self.words[i - ws] |= w >> bs;
            if bs > 0 && i - ws >= 1 {
                self.words[i - ws - 1] |= w << (64 - bs);
            }
        }
        self.mask_top();
    }

    /// self |= rotate_left(src, shift): bit i of src lands on (i+shift) mod len.
    pub fn or_rotated(&mut self, src: &Bitset, shift: usize) {
        debug_assert_eq!(self.len, src.len);
        let shift = shift % self.len.max(1);
        if shift == 0 {
            self.or_assign(src);
            return;
        }
        self.or_shl(src, shift);
        self.or_shr(src, self.len - shift);
    }
}

/// A subset of F_q^*, tied to its field context.
#[derive(Debug, Clone)]
pub struct MulSet {
    ctx: Arc<FieldCtx>,
    bits: Bitset,
}

impl PartialEq for MulSet {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.id() == other.ctx.id() && self.bits == other.bits
    }
}
impl Eq for MulSet {}

impl MulSet {
    pub fn from_codes(ctx: &Arc<FieldCtx>, codes: &[Elem]) -> Result<Self> {
        let q = ctx.q();
        let mut bits = Bitset::new(q as usize);
        for &c in codes {
            if c == 0 || c >= q {
                return Err(Error::InvalidElement(c));
            }
            bits.set(c as usize);
        }
        Ok(MulSet { ctx: Arc::clone(ctx), bits })
    }

    pub(crate) fn from_bits(ctx: &Arc<FieldCtx>, bits: Bitset) -> Self {
        debug_assert!(!bits.get(0));
        MulSet { ctx: Arc::clone(ctx), bits }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn bits(&self) -> &Bitset {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, e: Elem) -> bool {
        (e as usize) < self.bits.len() && self.bits.get(e as usize)
    }

    /// Sorted element codes.
    pub fn codes(&self) -> Vec<Elem> {
        self.bits.iter_ones().map(|i| i as Elem).collect()
    }

    pub fn is_subset_of(&self, other: &MulSet) -> bool {
        self.bits.is_subset_of(&other.bits)
    }
}

fn check_pair(a: &MulSet, b: &MulSet) -> Result<()> {
    if a.ctx.id() != b.ctx.id() {
        return Err(Error::ContextMismatch);
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

/// Bitmask over discrete logs: bit k set iff generator^k is in the set.
fn to_log_space(s: &MulSet) -> Bitset {
    let ctx = &s.ctx;
    let m = (ctx.q() - 1) as usize;
    let mut out = Bitset::new(m);
    for code in s.bits.iter_ones() {
        out.set(ctx.log(code as Elem).unwrap() as usize);
    }
    out
}

fn from_log_space(ctx: &Arc<FieldCtx>, logbits: &Bitset) -> MulSet {
    let mut bits = Bitset::new(ctx.q() as usize);
    for k in logbits.iter_ones() {
        bits.set(ctx.antilog(k as u32) as usize);
    }
    MulSet::from_bits(ctx, bits)
}

/// AB = {ab : a ∈ A, b ∈ B}.
pub fn product_set(a: &MulSet, b: &MulSet) -> Result<MulSet> {
    check_pair(a, b)?;
    let ctx = &a.ctx;
    let blog = to_log_space(b);
    let m = (ctx.q() - 1) as usize;
    let mut acc = Bitset::new(m);
    for code in a.bits.iter_ones() {
        let shift = ctx.log(code as Elem).unwrap() as usize;
        acc.or_rotated(&blog, shift);
    }
    Ok(from_log_space(ctx, &acc))
}

/// A⁻¹ = {a⁻¹ : a ∈ A}.
pub fn inverse_set(a: &MulSet) -> Result<MulSet> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let ctx = &a.ctx;
    let mut bits = Bitset::new(ctx.q() as usize);
    for code in a.bits.iter_ones() {
        bits.set(ctx.inv(code as Elem).unwrap() as usize);
    }
    Ok(MulSet::from_bits(ctx, bits))
}

/// DD⁻¹D⁻¹, the set controlling the main hypothesis.
pub fn triple_quotient(d: &MulSet) -> Result<MulSet> {
    let inv = inverse_set(d)?;
    product_set(&product_set(d, &inv)?, &inv)
}

/// Exact doubling data for a set D.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DoublingReport {
    pub size_d: u32,
    pub size_dd: u32,
    /// |DD⁻¹D⁻¹|
    pub size_triple: u32,
    /// Doubling constant |DD|/|D| as a reduced fraction.
    pub c: Rational,
    /// 2·|DD⁻¹D⁻¹| ≤ q+1
    pub hypothesis_holds: bool,
    /// c³|D| ≤ (q+1)/2, exact cross-multiplied comparison.
    pub pr_sufficient_holds: bool,
}

/// Exact nonnegative rational, kept reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        debug_assert!(den != 0);
        let g = gcd64(num, den);
        Rational { num: num / g, den: den / g }
    }
}

fn gcd64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Compute the exact doubling report for D. No floating point anywhere.
///
/// ```
/// use dirlab::field::{build_field, FieldSpec};
/// use dirlab::sets::{doubling_report, MulSet};
///
/// let f13 = build_field(FieldSpec::new(13, 1))?;
/// let d = MulSet::from_codes(&f13, &[1, 2, 3, 9])?;
/// let r = doubling_report(&d)?;
/// assert_eq!((r.c.num, r.c.den), (7, 4)); // |DD| = 7, |D| = 4
/// # Ok::<(), dirlab::Error>(())
/// ```
pub fn doubling_report(d: &MulSet) -> Result<DoublingReport> {
    if d.is_empty() {
        return Err(Error::EmptySet);
    }
    let q = d.ctx.q() as u64;
    let size_d = d.len() as u32;
    let dd = product_set(d, d)?;
    let size_dd = dd.len() as u32;
    let size_triple = triple_quotient(d)?.len() as u32;
    let c = Rational::new(size_dd as u64, size_d as u64);
    let hypothesis_holds = 2 * size_triple as u64 <= q + 1;
    // c^3 * |D| <= (q+1)/2  <=>  2 * num^3 * |D| <= (q+1) * den^3
    let lhs = 2u128 * (c.num as u128).pow(3) * size_d as u128;
    let rhs = (q as u128 + 1) * (c.den as u128).pow(3);
    let pr_sufficient_holds = lhs <= rhs;
    Ok(DoublingReport { size_d, size_dd, size_triple, c, hypothesis_holds, pr_sufficient_holds })
}

/// The unique subgroup of F_q^* of index d, i.e. {x^d : x ∈ F_q^*}.
pub fn subgroup_by_index(ctx: &Arc<FieldCtx>, d: u32) -> Result<MulSet> {
    let order = ctx.q() - 1;
    if d == 0 || order % d != 0 {
        return Err(Error::IndexDoesNotDivide { d, order });
    }
    let mut bits = Bitset::new(ctx.q() as usize);
    let size = order / d;
    for k in 0..size {
        bits.set(ctx.antilog(k * d) as usize);
    }
    Ok(MulSet::from_bits(ctx, bits))
}

/// All subgroups of F_q^*, one per divisor of q−1, ascending by index.
pub fn all_subgroups(ctx: &Arc<FieldCtx>) -> Vec<(u32, MulSet)> {
    divisors(ctx.q() - 1)
        .into_iter()
        .map(|d| (d, subgroup_by_index(ctx, d).unwrap()))
        .collect()
}

/// Is K a subgroup: contains 1, closed under products and inverses.
pub fn is_subgroup(k: &MulSet) -> bool {
    if !k.contains(1) {
        return false;
    }
    let Ok(kk) = product_set(k, k) else { return false };
    let Ok(kinv) = inverse_set(k) else { return false };
    kk == *k && kinv == *k
}

/// A coset decomposition D = aK.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetDecomposition {
    pub rep: Elem,
    pub subgroup: MulSet,
    pub index: u32,
}

/// Detect whether D is a multiplicative coset aK.
///
/// D = aK for a subgroup K iff DD⁻¹ is a subgroup of size |D|; the
/// representative is the smallest code of D.
pub fn coset_decompose(d: &MulSet) -> Result<Option<CosetDecomposition>> {
    if d.is_empty() {
        return Err(Error::EmptySet);
    }
    let quot = product_set(d, &inverse_set(d)?)?;
    if quot.len() != d.len() || !is_subgroup(&quot) {
        return Ok(None);
    }
    let rep = d.codes()[0];
    // sanity: rep * K must reproduce D bit for bit
    let singleton = MulSet::from_codes(&d.ctx, &[rep])?;
    let rebuilt = product_set(&singleton, &quot)?;
    if rebuilt != *d {
        return Ok(None);
    }
    let index = (d.ctx.q() - 1) / quot.len() as u32;
    Ok(Some(CosetDecomposition { rep, subgroup: quot, index }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{build_field, FieldSpec};
    use rand::{Rng, SeedableRng};

    fn f(p: u32, n: u32) -> Arc<FieldCtx> {
        build_field(FieldSpec::new(p, n)).unwrap()
    }

    /// Naive triple-loop oracle for product sets.
    fn product_oracle(a: &MulSet, b: &MulSet) -> Vec<Elem> {
        let ctx = a.ctx();
        let mut out: Vec<Elem> = a
            .codes()
            .iter()
            .flat_map(|&x| b.codes().iter().map(|&y| ctx.mul(x, y)).collect::<Vec<_>>())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    #[test]
    fn product_set_examples() {
        let f7 = f(7, 1);
        let a = MulSet::from_codes(&f7, &[1, 2]).unwrap();
        let b = MulSet::from_codes(&f7, &[3, 4]).unwrap();
        assert_eq!(product_set(&a, &b).unwrap().codes(), vec![1, 3, 4, 6]);

        let one = MulSet::from_codes(&f7, &[1]).unwrap();
        assert_eq!(product_set(&one, &b).unwrap(), b);

        let k = MulSet::from_codes(&f7, &[1, 2, 4]).unwrap();
        assert_eq!(product_set(&k, &k).unwrap(), k);
        assert_eq!(product_oracle(&k, &k), vec![1, 2, 4]);
    }

    #[test]
    fn product_set_matches_oracle_randomized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (p, n) in [(13u32, 1u32), (2, 5), (3, 3)] {
            let ctx = f(p, n);
            for _ in 0..50 {
                let a = random_set(&ctx, &mut rng);
                let b = random_set(&ctx, &mut rng);
                assert_eq!(product_set(&a, &b).unwrap().codes(), product_oracle(&a, &b));
            }
        }
    }

    fn random_set(ctx: &Arc<FieldCtx>, rng: &mut impl Rng) -> MulSet {
        let q = ctx.q();
        loop {
            let codes: Vec<Elem> = (1..q).filter(|_| rng.gen_bool(0.3)).collect();
            if !codes.is_empty() {
                return MulSet::from_codes(ctx, &codes).unwrap();
            }
        }
    }

    #[test]
    fn inverse_set_examples() {
        let f7 = f(7, 1);
        let s = MulSet::from_codes(&f7, &[2, 3]).unwrap();
        assert_eq!(inverse_set(&s).unwrap().codes(), vec![4, 5]);
        let one = MulSet::from_codes(&f7, &[1]).unwrap();
        assert_eq!(inverse_set(&one).unwrap(), one);
        let f5 = f(5, 1);
        let s = MulSet::from_codes(&f5, &[1, 4]).unwrap();
        assert_eq!(inverse_set(&s).unwrap(), s);
        // involution
        let f9 = f(3, 2);
        let s = MulSet::from_codes(&f9, &[2, 3, 7]).unwrap();
        assert_eq!(inverse_set(&inverse_set(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn triple_quotient_subgroups_fixed() {
        let f5 = f(5, 1);
        let d = MulSet::from_codes(&f5, &[1, 4]).unwrap();
        assert_eq!(triple_quotient(&d).unwrap(), d);
        let f7 = f(7, 1);
        let d = MulSet::from_codes(&f7, &[1, 2, 4]).unwrap();
        assert_eq!(triple_quotient(&d).unwrap(), d);
    }

    #[test]
    fn triple_quotient_matches_triple_loop_oracle() {
        let f13 = f(13, 1);
        let d = MulSet::from_codes(&f13, &[1, 2, 3, 9]).unwrap();
        // oracle: all d1 * d2^-1 * d3^-1
        let mut oracle: Vec<Elem> = vec![];
        for &x in &d.codes() {
            for &y in &d.codes() {
                for &z in &d.codes() {
                    let iy = f13.inv(y).unwrap();
                    let iz = f13.inv(z).unwrap();
                    oracle.push(f13.mul(f13.mul(x, iy), iz));
                }
            }
        }
        oracle.sort_unstable();
        oracle.dedup();
        assert_eq!(triple_quotient(&d).unwrap().codes(), oracle);
    }

    #[test]
    fn doubling_report_examples() {
        let f9 = f(3, 2);
        let squares = subgroup_by_index(&f9, 2).unwrap();
        assert_eq!(squares.codes(), vec![1, 2, 3, 6]);
        let r = doubling_report(&squares).unwrap();
        assert_eq!(r.c, Rational { num: 1, den: 1 });
        assert!(r.hypothesis_holds);

        let f5 = f(5, 1);
        let d = MulSet::from_codes(&f5, &[1, 4]).unwrap();
        let r = doubling_report(&d).unwrap();
        assert_eq!(r.size_triple, 2);
        assert!(r.hypothesis_holds);

        let f7 = f(7, 1);
        let full = MulSet::from_codes(&f7, &[1, 2, 3, 4, 5, 6]).unwrap();
        let r = doubling_report(&full).unwrap();
        assert_eq!(r.size_triple, 6);
        assert!(!r.hypothesis_holds);

        let f13 = f(13, 1);
        let d = MulSet::from_codes(&f13, &[1, 2, 3, 9]).unwrap();
        let r = doubling_report(&d).unwrap();
        assert_eq!(r.c, Rational { num: 7, den: 4 });
    }

    #[test]
    fn subgroup_examples() {
        let f7 = f(7, 1);
        assert_eq!(subgroup_by_index(&f7, 2).unwrap().codes(), vec![1, 2, 4]);
        assert_eq!(subgroup_by_index(&f7, 1).unwrap().codes(), vec![1, 2, 3, 4, 5, 6]);
        assert!(subgroup_by_index(&f7, 4).is_err());

        let f5 = f(5, 1);
        let subs = all_subgroups(&f5);
        let view: Vec<(u32, Vec<Elem>)> = subs.iter().map(|(d, s)| (*d, s.codes())).collect();
        assert_eq!(
            view,
            vec![(1, vec![1, 2, 3, 4]), (2, vec![1, 4]), (4, vec![1])]
        );

        let f4 = f(2, 2);
        let subs = all_subgroups(&f4);
        assert_eq!(subs.iter().map(|(d, s)| (*d, s.len())).collect::<Vec<_>>(), vec![(1, 3), (3, 1)]);

        let f13 = f(13, 1);
        assert_eq!(all_subgroups(&f13).len(), 6);
    }

    #[test]
    fn subgroup_structure() {
        for (p, n) in [(2u32, 4u32), (3, 2), (13, 1)] {
            let ctx = f(p, n);
            for (d, k) in all_subgroups(&ctx) {
                assert!(is_subgroup(&k));
                assert_eq!(k.len() as u32 * d, ctx.q() - 1);
            }
        }
    }

    #[test]
    fn coset_decompose_examples() {
        let f7 = f(7, 1);
        let d = MulSet::from_codes(&f7, &[3, 5, 6]).unwrap();
        let dec = coset_decompose(&d).unwrap().unwrap();
        assert_eq!(dec.rep, 3);
        assert_eq!(dec.subgroup.codes(), vec![1, 2, 4]);
        assert_eq!(dec.index, 2);

        let one = MulSet::from_codes(&f7, &[1]).unwrap();
        let dec = coset_decompose(&one).unwrap().unwrap();
        assert_eq!((dec.rep, dec.index), (1, 6));

        let d = MulSet::from_codes(&f7, &[1, 3]).unwrap();
        assert!(coset_decompose(&d).unwrap().is_none());
    }

    #[test]
    fn coset_round_trip_randomized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let ctx = f(2, 4);
        for _ in 0..200 {
            let d = random_set(&ctx, &mut rng);
            if let Some(dec) = coset_decompose(&d).unwrap() {
                assert!(is_subgroup(&dec.subgroup));
                assert_eq!(dec.index as usize * dec.subgroup.len(), ctx.q() as usize - 1);
                let a = MulSet::from_codes(&ctx, &[dec.rep]).unwrap();
                assert_eq!(product_set(&a, &dec.subgroup).unwrap(), d);
            }
        }
    }

    #[test]
    fn associativity_and_antihomomorphism_randomized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let ctx = f(3, 2);
        for _ in 0..100 {
            let a = random_set(&ctx, &mut rng);
            let b = random_set(&ctx, &mut rng);
            let c = random_set(&ctx, &mut rng);
            let left = product_set(&product_set(&a, &b).unwrap(), &c).unwrap();
            let right = product_set(&a, &product_set(&b, &c).unwrap()).unwrap();
            assert_eq!(left, right);
            let inv_ab = inverse_set(&product_set(&a, &b).unwrap()).unwrap();
            let prod_inv =
                product_set(&inverse_set(&a).unwrap(), &inverse_set(&b).unwrap()).unwrap();
            assert_eq!(inv_ab, prod_inv);
        }
    }

    #[test]
    fn error_paths() {
        let f7 = f(7, 1);
        let f5 = f(5, 1);
        let a = MulSet::from_codes(&f7, &[1]).unwrap();
        let b = MulSet::from_codes(&f5, &[1]).unwrap();
        assert!(matches!(product_set(&a, &b), Err(Error::ContextMismatch)));
        let empty = MulSet::from_codes(&f7, &[]).unwrap();
        assert!(matches!(product_set(&a, &empty), Err(Error::EmptySet)));
        assert!(matches!(inverse_set(&empty), Err(Error::EmptySet)));
        assert!(matches!(doubling_report(&empty), Err(Error::EmptySet)));
        assert!(matches!(MulSet::from_codes(&f7, &[0]), Err(Error::InvalidElement(0))));
        assert!(matches!(MulSet::from_codes(&f7, &[7]), Err(Error::InvalidElement(7))));
    }
}
