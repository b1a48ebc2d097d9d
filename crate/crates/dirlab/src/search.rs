//! Exhaustive enumeration of quotient-constrained functions, theorem
//! verification sweeps, and the linearized-polynomial census.
//!
//! The search fixes f(0) = 0 and assigns f(x) in ascending code order.
//! Each unassigned position keeps a candidate bitset; assigning f(x) = v
//! intersects every later position z with the shifted set v + (z−x)·D and
//! prunes on empty. Subtrees are split on the value of f(1) (at most |D|
//! branches), which makes the parallel merge order, the output order and
//! the node count independent of the worker count.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::directions::{image_ratio_set, FuncTable};
use crate::field::{divisors, gcd, Elem, FieldCtx, FieldSpec};
use crate::linearized::{detect_frobenius_monomial, detect_linearized, FrobeniusMonomial, LinPoly};
use crate::sets::{
    coset_decompose, doubling_report, product_set, subgroup_by_index, Bitset, DoublingReport,
    MulSet,
};
use crate::{Error, Result};

/// Guard for the all-functions sweep of the directions theorem.
pub const DIRECTIONS_EXHAUSTION_MAX_Q: u64 = 9;
/// Guard for the linearized census (q^n coefficient vectors).
pub const CENSUS_MAX_SPACE: u64 = 100_000_000;

/// Outcome of a full quotient search against one set D.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    /// Sorted element codes of D.
    pub set: Vec<Elem>,
    pub hypothesis: DoublingReport,
    /// Normalized solutions (f(0) = 0), lexicographic by value table.
    pub solutions: Vec<Vec<Elem>>,
    pub solution_count: usize,
    /// Every solution is a Frobenius monomial with b = 0. Vacuously true
    /// when there are no solutions.
    pub all_monomial: bool,
    pub monomial_forms: Vec<FrobeniusMonomial>,
    pub node_count: u64,
    /// Volatile timing; excluded from canonical serialization.
    pub wall_time_ms: u64,
    /// Hypothesis holds but a non-monomial solution exists — an
    /// implementation bug signal, never expected.
    pub violation: bool,
    /// Cross-check against the independent monomial oracle, when run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_match: Option<bool>,
}

struct SearchState<'a> {
    ctx: &'a FieldCtx,
    /// scaled[c] = bitset of c·D, c in 1..q.
    scaled: Vec<Bitset>,
    candidates: Vec<Bitset>,
    assigned: Vec<Elem>,
    solutions: Vec<Vec<Elem>>,
    nodes: u64,
}

impl<'a> SearchState<'a> {
    fn allowed(&self, z: Elem, x: Elem, v: Elem) -> Bitset {
        // v + (z - x)·D in code space
        let ctx = self.ctx;
        let c = ctx.sub(z, x);
        let mut out = Bitset::new(ctx.q() as usize);
        for w in self.scaled[c as usize].iter_ones() {
            out.set(ctx.add(w as Elem, v) as usize);
        }
        out
    }

    fn descend(&mut self, pos: Elem) {
        let q = self.ctx.q();
        if pos == q {
            self.solutions.push(self.assigned.clone());
            return;
        }
        let values: Vec<Elem> =
            self.candidates[pos as usize].iter_ones().map(|v| v as Elem).collect();
        for v in values {
            self.nodes += 1;
            self.assigned[pos as usize] = v;
            let mut saved = Vec::with_capacity((q - pos - 1) as usize);
            let mut viable = true;
            for z in pos + 1..q {
                saved.push(self.candidates[z as usize].clone());
                let allow = self.allowed(z, pos, v);
                self.candidates[z as usize].and_assign(&allow);
                if self.candidates[z as usize].is_empty() {
                    viable = false;
                    break;
                }
            }
            if viable {
                self.descend(pos + 1);
            }
            for (i, s) in saved.into_iter().enumerate() {
                self.candidates[(pos + 1) as usize + i] = s;
            }
        }
    }
}

fn scaled_copies(d: &MulSet) -> Vec<Bitset> {
    let ctx = d.ctx();
    let q = ctx.q();
    let codes = d.codes();
    let mut out = vec![Bitset::new(q as usize); q as usize];
    for c in 1..q {
        for &e in &codes {
            out[c as usize].set(ctx.mul(c, e) as usize);
        }
    }
    out
}

/// Every f: F_q → F_q with f(0) = 0 whose difference quotients all lie in
/// D, sorted lexicographically by value table. With `normalize` off, the
/// constant shifts f + b are included as well.
///
/// ```
/// use dirlab::field::{build_field, FieldSpec};
/// use dirlab::search::enumerate_quotient_functions;
/// use dirlab::sets::MulSet;
///
/// let f5 = build_field(FieldSpec::new(5, 1))?;
/// let d = MulSet::from_codes(&f5, &[1, 4])?;
/// let sols = enumerate_quotient_functions(&d, true)?;
/// // exactly x ↦ x and x ↦ 4x survive
/// assert_eq!(sols.len(), 2);
/// assert_eq!(sols[0].values(), &[0, 1, 2, 3, 4]);
/// assert_eq!(sols[1].values(), &[0, 4, 3, 2, 1]);
/// # Ok::<(), dirlab::Error>(())
/// ```
pub fn enumerate_quotient_functions(d: &MulSet, normalize: bool) -> Result<Vec<FuncTable>> {
    enumerate_with_nodes(d, normalize, 1).map(|(tables, _)| tables)
}

/// Like [`enumerate_quotient_functions`] but exposing the deterministic
/// node count and the worker split.
pub fn enumerate_with_nodes(
    d: &MulSet,
    normalize: bool,
    workers: usize,
) -> Result<(Vec<FuncTable>, u64)> {
    if d.is_empty() {
        return Err(Error::EmptySet);
    }
    let ctx = d.ctx();
    let q = ctx.q();
    let scaled = scaled_copies(d);

    // initial candidates come from the pair (x, 0): f(x) ∈ x·D
    let init: Vec<Bitset> = (0..q).map(|x| scaled[x as usize].clone()).collect();

    // branch on f(1); each branch is an independent deterministic subtree
    let branches: Vec<Elem> = init[1.min(q as usize - 1)].iter_ones().map(|v| v as Elem).collect();
    let workers = workers.max(1);

    let run_branch = |v1: Elem| -> (Vec<Vec<Elem>>, u64) {
        let mut st = SearchState {
            ctx,
            scaled: scaled.clone(),
            candidates: init.clone(),
            assigned: vec![0; q as usize],
            solutions: vec![],
            nodes: 1, // the f(1) = v1 assignment itself
        };
        st.assigned[1] = v1;
        let mut viable = true;
        for z in 2..q {
            let allow = st.allowed(z, 1, v1);
            st.candidates[z as usize].and_assign(&allow);
            if st.candidates[z as usize].is_empty() {
                viable = false;
                break;
            }
        }
        if viable {
            st.descend(2.min(q));
        }
        (st.solutions, st.nodes)
    };

    let mut per_branch: Vec<(Vec<Vec<Elem>>, u64)> = Vec::new();
    if workers == 1 || branches.len() <= 1 {
        per_branch = branches.iter().map(|&v| run_branch(v)).collect();
    } else {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for chunk_start in 0..workers.min(branches.len()) {
                let branch_slice: Vec<(usize, Elem)> = branches
                    .iter()
                    .copied()
                    .enumerate()
                    .skip(chunk_start)
                    .step_by(workers.min(branches.len()))
                    .collect();
                let run = &run_branch;
                handles.push(scope.spawn(move || {
                    branch_slice
                        .into_iter()
                        .map(|(i, v)| (i, run(v)))
                        .collect::<Vec<_>>()
                }));
            }
            let mut indexed: Vec<(usize, (Vec<Vec<Elem>>, u64))> = handles
                .into_iter()
                .flat_map(|h| h.join().expect("search worker panicked"))
                .collect();
            indexed.sort_by_key(|(i, _)| *i);
            per_branch = indexed.into_iter().map(|(_, r)| r).collect();
        });
    }

    let mut nodes = 0u64;
    let mut tables: Vec<Vec<Elem>> = Vec::new();
    for (sols, n) in per_branch {
        nodes += n;
        tables.extend(sols);
    }

    if !normalize {
        let mut expanded = Vec::with_capacity(tables.len() * q as usize);
        for t in &tables {
            for b in 0..q {
                expanded.push(t.iter().map(|&v| ctx.add(v, b)).collect::<Vec<Elem>>());
            }
        }
        expanded.sort();
        tables = expanded;
    }

    let out = tables
        .into_iter()
        .map(|t| FuncTable::new(ctx, t).expect("search produces valid tables"))
        .collect();
    Ok((out, nodes))
}

/// Post-hoc O(q²) recheck that every quotient of f lies in D.
pub fn satisfies_quotient_condition(f: &FuncTable, d: &MulSet) -> bool {
    let ctx = f.ctx();
    let q = ctx.q();
    for x in 0..q {
        for y in x + 1..q {
            let slope = ctx
                .div(ctx.sub(f.eval(y), f.eval(x)), ctx.sub(y, x))
                .expect("y != x");
            if !d.contains(slope) {
                return false;
            }
        }
    }
    true
}

/// Run the full extended-McConnel verification for one set D.
pub fn verify_mcconnel_extended(d: &MulSet) -> Result<SearchReport> {
    verify_mcconnel_with(d, 1, true)
}

/// Verification with explicit worker count and optional oracle cross-check.
pub fn verify_mcconnel_with(d: &MulSet, workers: usize, cross_check: bool) -> Result<SearchReport> {
    let start = Instant::now();
    let hypothesis = doubling_report(d)?;
    let (solutions, node_count) = enumerate_with_nodes(d, true, workers)?;
    // revalidate post-search
    for f in &solutions {
        debug_assert!(satisfies_quotient_condition(f, d));
    }
    let mut monomial_forms = Vec::new();
    let mut all_monomial = true;
    for f in &solutions {
        match detect_frobenius_monomial(f) {
            Some(m) if m.b == 0 => monomial_forms.push(m),
            _ => all_monomial = false,
        }
    }
    let (expected_count, expected_match) = if cross_check {
        let expected = expected_solution_set(d)?;
        let ctx = d.ctx();
        let mut expected_tables: Vec<Vec<Elem>> =
            expected.iter().map(|m| m.table(ctx).values().to_vec()).collect();
        expected_tables.sort();
        expected_tables.dedup();
        let found: Vec<Vec<Elem>> = solutions.iter().map(|f| f.values().to_vec()).collect();
        let superset = expected_tables.iter().all(|t| found.contains(t));
        let equal = superset && expected_tables.len() == found.len();
        (Some(expected_tables.len()), Some(if all_monomial { equal } else { superset }))
    } else {
        (None, None)
    };
    let violation = (hypothesis.hypothesis_holds && !all_monomial)
        || expected_match == Some(false);
    Ok(SearchReport {
        set: d.codes(),
        hypothesis,
        solution_count: solutions.len(),
        solutions: solutions.iter().map(|f| f.values().to_vec()).collect(),
        all_monomial,
        monomial_forms,
        node_count,
        wall_time_ms: start.elapsed().as_millis() as u64,
        violation,
        expected_count,
        expected_match,
    })
}

/// Independent oracle for the monomial side of the theorem: all maps
/// x ↦ a·x^{p^j} with a·Im(x^{p^j−1}) ⊆ D.
///
/// Im(x^{p^j−1}) is the subgroup of index gcd(p^j−1, q−1) = p^{gcd(j,n)}−1,
/// so membership reduces to subgroup arithmetic, independent of the search.
pub fn expected_solution_set(d: &MulSet) -> Result<Vec<FrobeniusMonomial>> {
    if d.is_empty() {
        return Err(Error::EmptySet);
    }
    let ctx = d.ctx();
    let n = ctx.n();
    let p = ctx.p();
    let mut out = Vec::new();
    let order = ctx.q() - 1;
    for j in 0..n {
        // gcd(p^j − 1, q − 1); j = 0 degenerates to the full order (Im = {1})
        let pj_minus_one = (p as u64).pow(j) - 1;
        let index = gcd((pj_minus_one % order as u64) as u32, order);
        debug_assert_eq!(index, p.pow(gcd(j, n)) - 1);
        let image = subgroup_by_index(ctx, index)?;
        for &a in &d.codes() {
            let a_set = MulSet::from_codes(ctx, &[a])?;
            if product_set(&a_set, &image)?.is_subset_of(d) {
                out.push(FrobeniusMonomial { a, j, b: 0 });
            }
        }
    }
    Ok(out)
}

/// Outcome of the all-functions directions-theorem sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionsSweep {
    pub q: u32,
    pub checked: u64,
    pub violations: u64,
}

/// Exhaustively verify over all q^{q−1} tables with f(0) = 0 that a
/// direction set of size at most (q+1)/2 forces an additive function.
///
/// Guarded to q ≤ 9.
pub fn verify_directions_theorem(ctx: &Arc<FieldCtx>) -> Result<DirectionsSweep> {
    let q = ctx.q();
    if q as u64 > DIRECTIONS_EXHAUSTION_MAX_Q {
        return Err(Error::FieldTooLargeForExhaustion {
            q: q as u64,
            limit: DIRECTIONS_EXHAUSTION_MAX_Q,
        });
    }
    // the bound |D_f| <= (q+1)/2 is tested as 2*count <= q+1, exactly
    // precompute the pair list with inverted x-differences
    let mut pairs = Vec::new();
    for x in 0..q {
        for y in x + 1..q {
            pairs.push((x, y, ctx.inv(ctx.sub(y, x)).expect("x != y")));
        }
    }
    let mut checked = 0u64;
    let mut violations = 0u64;
    let mut values = vec![0 as Elem; q as usize];
    loop {
        checked += 1;
        // direction count with early exit once the bound is exceeded
        let mut seen = 0u64;
        let mut count = 0u32;
        let mut small = true;
        for &(x, y, inv_dx) in &pairs {
            let slope = ctx.mul(ctx.sub(values[y as usize], values[x as usize]), inv_dx);
            let bit = 1u64 << slope;
            if seen & bit == 0 {
                seen |= bit;
                count += 1;
                if 2 * count > q + 1 {
                    small = false;
                    break;
                }
            }
        }
        if small {
            let f = FuncTable::new(ctx, values.clone()).expect("valid table");
            if detect_linearized(&f).is_none() {
                violations += 1;
            }
        }
        // odometer over positions 1..q
        let mut pos = 1usize;
        loop {
            if pos == q as usize {
                return Ok(DirectionsSweep { q, checked, violations });
            }
            values[pos] += 1;
            if values[pos] < q {
                break;
            }
            values[pos] = 0;
            pos += 1;
        }
    }
}

/// One classified direction set in the census.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CosetClass {
    pub directions: Vec<Elem>,
    pub contains_zero: bool,
    pub satisfies_bound: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coset_rep: Option<Elem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coset_index: Option<u32>,
}

/// Census of direction-set sizes over all linearized polynomials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensusReport {
    pub field: FieldSpec,
    /// direction-set size -> number of linearized polynomials attaining it
    pub entries: BTreeMap<u32, u64>,
    pub coset_classified: Vec<CosetClass>,
    pub checked: u64,
    pub violations: u64,
}

/// Enumerate all q^n linearized polynomials, tally |𝒟_f|, and check the
/// coset classification in both directions.
pub fn corollary_census(ctx: &Arc<FieldCtx>) -> Result<CensusReport> {
    let q = ctx.q() as u64;
    let n = ctx.n();
    let space = q.pow(n);
    if space > CENSUS_MAX_SPACE {
        return Err(Error::FieldTooLargeForExhaustion { q: space, limit: CENSUS_MAX_SPACE });
    }
    let mut entries: BTreeMap<u32, u64> = BTreeMap::new();
    let mut class_cache: HashMap<Vec<Elem>, CosetClass> = HashMap::new();
    let mut violations = 0u64;
    let mut checked = 0u64;

    let valid_indices: Vec<u32> =
        divisors(n).iter().map(|&r| ctx.p().pow(r) - 1).collect();

    for enc in 0..space {
        checked += 1;
        let mut coeffs = vec![0 as Elem; n as usize];
        let mut e = enc;
        for c in coeffs.iter_mut() {
            *c = (e % q) as Elem;
            e /= q;
        }
        let l = LinPoly::new(ctx, coeffs).expect("n coefficients");
        let dset = image_ratio_set(&l.table())?;
        entries.entry(dset.len() as u32).or_insert(0);
        *entries.get_mut(&(dset.len() as u32)).unwrap() += 1;

        let key = dset.codes();
        if !class_cache.contains_key(&key) {
            let contains_zero = dset.contains(0);
            let (satisfies_bound, coset_rep, coset_index) = if contains_zero {
                (false, None, None)
            } else {
                let d = dset.as_mul_set()?;
                let bound = 2 * triple_size(&d)? as u64 <= q + 1;
                if bound {
                    match coset_decompose(&d)? {
                        Some(dec) => {
                            if !valid_indices.contains(&dec.index) {
                                violations += 1;
                            }
                            (true, Some(dec.rep), Some(dec.index))
                        }
                        None => {
                            violations += 1;
                            (true, None, None)
                        }
                    }
                } else {
                    match coset_decompose(&d)? {
                        Some(dec) => (false, Some(dec.rep), Some(dec.index)),
                        None => (false, None, None),
                    }
                }
            };
            class_cache.insert(
                key.clone(),
                CosetClass {
                    directions: key,
                    contains_zero,
                    satisfies_bound,
                    coset_rep,
                    coset_index,
                },
            );
        }
    }

    // converse direction: every coset a·K of index p^r−1, r | n, is attained
    // by f(x) = a·x^{p^r}
    for &r in &divisors(n) {
        let index = ctx.p().pow(r) - 1;
        let k = subgroup_by_index(ctx, index)?;
        for a in 1..ctx.q() {
            let j = r % n; // r = n wraps to x^{p^n} = x
            let f = FrobeniusMonomial { a, j, b: 0 }.table(ctx);
            let dset = image_ratio_set(&f)?;
            let a_set = MulSet::from_codes(ctx, &[a])?;
            let coset = product_set(&a_set, &k)?;
            if dset.codes() != coset.codes() || dset.has_infinity() {
                violations += 1;
            }
        }
    }

    let mut coset_classified: Vec<CosetClass> = class_cache.into_values().collect();
    coset_classified.sort_by(|a, b| a.directions.cmp(&b.directions));
    Ok(CensusReport {
        field: ctx.spec().clone(),
        entries,
        coset_classified,
        checked,
        violations,
    })
}

fn triple_size(d: &MulSet) -> Result<usize> {
    Ok(crate::sets::triple_quotient(d)?.len())
}

/// How to generate candidate sets with small doubling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SamplerStrategy {
    /// D = K ∪ E for the index-`index` subgroup K and extra elements E.
    /// Explicit extras are used as-is; `random_extra` more are drawn
    /// uniformly from the complement using the run seed.
    SubgroupPlusPoints { index: u32, extra: Vec<Elem>, random_extra: u32 },
    /// D = union of cosets of the index-`index` subgroup, by representative.
    /// `random_cosets` more representatives are drawn using the run seed.
    CosetUnion { index: u32, reps: Vec<Elem>, random_cosets: u32 },
}

/// Build candidate sets per the strategy, keep those whose triple-quotient
/// hypothesis holds, and run the full verification on each survivor.
pub fn small_doubling_sampler(
    ctx: &Arc<FieldCtx>,
    strategy: &SamplerStrategy,
    seed: u64,
    workers: usize,
) -> Result<Vec<SearchReport>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<MulSet> = match strategy {
        SamplerStrategy::SubgroupPlusPoints { index, extra, random_extra } => {
            let k = subgroup_by_index(ctx, *index)?;
            let mut codes = k.codes();
            codes.extend_from_slice(extra);
            let mut sets = vec![];
            if *random_extra == 0 {
                sets.push(MulSet::from_codes(ctx, &codes)?);
            } else {
                for _ in 0..*random_extra {
                    let mut with_extra = codes.clone();
                    loop {
                        let e = rng.gen_range(1..ctx.q());
                        if !with_extra.contains(&e) {
                            with_extra.push(e);
                            break;
                        }
                    }
                    sets.push(MulSet::from_codes(ctx, &with_extra)?);
                }
            }
            sets
        }
        SamplerStrategy::CosetUnion { index, reps, random_cosets } => {
            let k = subgroup_by_index(ctx, *index)?;
            let mut all_reps = reps.clone();
            for _ in 0..*random_cosets {
                all_reps.push(rng.gen_range(1..ctx.q()));
            }
            if all_reps.is_empty() {
                return Err(Error::EmptySet);
            }
            let mut union = MulSet::from_codes(ctx, &[])?;
            let mut sets = vec![];
            for &a in &all_reps {
                if a == 0 || a >= ctx.q() {
                    return Err(Error::InvalidElement(a));
                }
                let coset = product_set(&MulSet::from_codes(ctx, &[a])?, &k)?;
                let mut codes = union.codes();
                codes.extend(coset.codes());
                union = MulSet::from_codes(ctx, &codes)?;
            }
            sets.push(union);
            sets
        }
    };

    let mut out = Vec::new();
    for d in candidates {
        let report = doubling_report(&d)?;
        if report.hypothesis_holds {
            out.push(verify_mcconnel_with(&d, workers, true)?);
        }
    }
    Ok(out)
}
