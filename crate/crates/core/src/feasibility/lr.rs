//! Integer-partition combinatorics: partitions, index tuples and the
//! Littlewood-Richardson coefficient engine.
//!
//! Coefficients are counted by enumerating column-strict skew tableaux whose
//! reverse reading word is a lattice word; multi-factor products iterate the
//! single-factor expansion left to right, pruning intermediate shapes that
//! leave the target's Young diagram.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Hard ceilings for the tuple enumeration; beyond them the combinatorics
/// blows up and callers get a clear refusal instead of an open-ended run.
pub const MAX_LR_DIMENSION: usize = 6;
pub const MAX_LR_CELLS: usize = 24;

/// An integer partition: weakly decreasing non-negative parts, trailing
/// zeros normalized away.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "partition parts must be weakly decreasing, got {parts:?}"
            )));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Part at `row` (0-based), zero beyond the last row.
    pub fn part(&self, row: usize) -> usize {
        self.0.get(row).copied().unwrap_or(0)
    }

    /// Total number of cells.
    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    /// Containment of Young diagrams.
    pub fn contains(&self, other: &Partition) -> bool {
        (0..other.len()).all(|r| other.part(r) <= self.part(r))
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

/// A strictly increasing tuple `1 <= j_1 < ... < j_r <= d` of 1-based
/// indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexTuple {
    indices: Vec<usize>,
    d: usize,
}

impl IndexTuple {
    pub fn new(indices: Vec<usize>, d: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("index tuple cannot be empty".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "indices must be strictly increasing, got {indices:?}"
            )));
        }
        if indices[0] < 1 || *indices.last().unwrap() > d {
            return Err(Error::InvalidArgument(format!(
                "indices {indices:?} out of range 1..={d}"
            )));
        }
        Ok(IndexTuple { indices, d })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn r(&self) -> usize {
        self.indices.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The associated partition `(j_r - r, ..., j_1 - 1)`.
    pub fn partition(&self) -> Partition {
        let r = self.indices.len();
        let parts = (0..r)
            .rev()
            .map(|s| self.indices[s] - (s + 1))
            .collect::<Vec<_>>();
        Partition::new(parts).expect("strictly increasing indices give a partition")
    }

    /// Sum of the entries of `values` selected by this tuple.
    pub fn select_sum(&self, values: &[f64]) -> f64 {
        self.indices.iter().map(|&j| values[j - 1]).sum()
    }

    /// `|J ∩ {1..=t}|`.
    pub fn count_at_most(&self, t: usize) -> usize {
        self.indices.iter().take_while(|&&j| j <= t).count()
    }
}

impl std::fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.indices.iter().join(","))
    }
}

/// Counts Littlewood-Richardson skew tableaux of shape `outer/inner` with
/// the given content: column-strict fillings whose reverse reading word is a
/// lattice word.
pub fn lr_skew_count(outer: &Partition, inner: &Partition, content: &Partition) -> u64 {
    if !outer.contains(inner) {
        return 0;
    }
    if outer.weight() != inner.weight() + content.weight() {
        return 0;
    }
    if content.is_empty() {
        return 1; // empty filling of the empty skew shape
    }
    // cells in reverse reading order: rows top to bottom, right to left
    let mut cells = Vec::new();
    for row in 0..outer.len() {
        for col in (inner.part(row)..outer.part(row)).rev() {
            cells.push((row, col));
        }
    }
    let letters = content.len();
    let mut grid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut counts = vec![0usize; letters + 1];
    count_fillings(outer, inner, content, &cells, 0, &mut grid, &mut counts)
}

fn count_fillings(
    outer: &Partition,
    inner: &Partition,
    content: &Partition,
    cells: &[(usize, usize)],
    pos: usize,
    grid: &mut HashMap<(usize, usize), usize>,
    counts: &mut Vec<usize>,
) -> u64 {
    if pos == cells.len() {
        return 1;
    }
    let (row, col) = cells[pos];
    let mut total = 0;
    for letter in 1..=content.len() {
        if counts[letter] >= content.part(letter - 1) {
            continue; // content budget exhausted
        }
        if letter > 1 && counts[letter - 1] <= counts[letter] {
            continue; // lattice-word prefix condition
        }
        // row weakly increasing: right neighbour was filled earlier
        if col + 1 < outer.part(row) {
            if let Some(&right) = grid.get(&(row, col + 1)) {
                if letter > right {
                    continue;
                }
            }
        }
        // column strictly increasing against the filled cell above
        if row > 0 && col >= inner.part(row - 1) {
            if let Some(&above) = grid.get(&(row - 1, col)) {
                if letter <= above {
                    continue;
                }
            }
        }
        grid.insert((row, col), letter);
        counts[letter] += 1;
        total += count_fillings(outer, inner, content, cells, pos + 1, grid, counts);
        counts[letter] -= 1;
        grid.remove(&(row, col));
    }
    total
}

/// Partitions `lambda` with `nu ⊆ lambda ⊆ bound` and `|lambda| = total`.
fn shapes_between(nu: &Partition, bound: &Partition, total: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let rows = bound.len();
    let mut current: Vec<usize> = Vec::with_capacity(rows);
    fn rec(
        row: usize,
        rows: usize,
        remaining: usize,
        prev: usize,
        nu: &Partition,
        bound: &Partition,
        current: &mut Vec<usize>,
        out: &mut Vec<Partition>,
    ) {
        if row == rows {
            if remaining == 0 {
                out.push(Partition::new(current.clone()).expect("rows generated decreasing"));
            }
            return;
        }
        let lo = nu.part(row);
        let hi = bound.part(row).min(prev).min(remaining);
        for v in lo..=hi {
            current.push(v);
            rec(row + 1, rows, remaining - v, v, nu, bound, current, out);
            current.pop();
        }
    }
    if total >= nu.weight() && bound.weight() >= total && bound.contains(nu) {
        rec(
            0,
            rows,
            total,
            usize::MAX,
            nu,
            bound,
            &mut current,
            &mut out,
        );
    }
    out
}

/// Expands one product step: for every accumulated shape `nu` with its
/// multiplicity, adds `c^{lambda}_{nu,mu} * mult` to every `lambda ⊆ bound`.
fn add_factor(
    shapes: &HashMap<Partition, u64>,
    mu: &Partition,
    bound: &Partition,
) -> HashMap<Partition, u64> {
    let mut next: HashMap<Partition, u64> = HashMap::new();
    for (nu, &mult) in shapes {
        let total = nu.weight() + mu.weight();
        for lambda in shapes_between(nu, bound, total) {
            let c = lr_skew_count(&lambda, nu, mu);
            if c > 0 {
                *next.entry(lambda).or_insert(0) += mult * c;
            }
        }
    }
    next
}

/// The multi-factor Littlewood-Richardson coefficient
/// `c^{target}_{factors[0], ..., factors[k-1]}`.
///
/// Zero whenever the weights do not balance. The empty factor list counts
/// the empty product, so the coefficient is 1 exactly when `target` is the
/// empty partition.
pub fn lr_coefficient(target: &Partition, factors: &[Partition]) -> u64 {
    let total: usize = factors.iter().map(Partition::weight).sum();
    if total != target.weight() {
        return 0;
    }
    let mut shapes: HashMap<Partition, u64> = HashMap::new();
    shapes.insert(Partition::empty(), 1);
    for mu in factors {
        shapes = add_factor(&shapes, mu, target);
        if shapes.is_empty() {
            return 0;
        }
    }
    shapes.get(target).copied().unwrap_or(0)
}

/// An (m+1)-tuple `(J_0, ..., J_m)` with positive Littlewood-Richardson
/// coefficient of the associated partitions.
pub type LrTuple = Vec<IndexTuple>;

fn tuple_cache() -> &'static Mutex<HashMap<(usize, usize, usize), std::sync::Arc<Vec<LrTuple>>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, usize), std::sync::Arc<Vec<LrTuple>>>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Enumerates `LR_r^d(m)`: every (m+1)-tuple of r-element index tuples in
/// `{1..d}` whose associated partitions have a positive multi-factor
/// Littlewood-Richardson coefficient. Lexicographic in `(J_0, ..., J_m)`.
pub fn enumerate_lr_tuples(r: usize, d: usize, m: usize) -> Result<std::sync::Arc<Vec<LrTuple>>> {
    if r < 1 || r > d {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= r <= d, got r = {r}, d = {d}"
        )));
    }
    if m < 1 {
        return Err(Error::InvalidArgument("need at least one factor".into()));
    }
    if d > MAX_LR_DIMENSION {
        return Err(Error::GuardExceeded(format!(
            "tuple enumeration supports d <= {MAX_LR_DIMENSION}, got d = {d}"
        )));
    }
    let max_cells = r * (d - r);
    if 2 * max_cells > MAX_LR_CELLS {
        return Err(Error::GuardExceeded(format!(
            "tuple enumeration caps total diagram weight at {MAX_LR_CELLS} cells"
        )));
    }
    let n_tuples = binomial(d, r).pow(m as u32 + 1);
    if n_tuples > 20_000_000 {
        return Err(Error::GuardExceeded(format!(
            "enumeration of {n_tuples} candidate tuples refused"
        )));
    }
    if let Some(hit) = tuple_cache().lock().unwrap().get(&(r, d, m)) {
        return Ok(hit.clone());
    }

    let singles: Vec<IndexTuple> = (1..=d)
        .combinations(r)
        .map(|c| IndexTuple::new(c, d).expect("combinations are strictly increasing"))
        .collect();
    let parts: Vec<Partition> = singles.iter().map(IndexTuple::partition).collect();
    let bound = Partition::new(vec![d - r; r]).expect("rectangle");

    let mut result: Vec<LrTuple> = Vec::new();
    // factor tuples first so the product expansion is shared across J_0
    for factor_idx in (0..m).map(|_| 0..singles.len()).multi_cartesian_product() {
        let mut shapes: HashMap<Partition, u64> = HashMap::new();
        shapes.insert(Partition::empty(), 1);
        for &fi in &factor_idx {
            shapes = add_factor(&shapes, &parts[fi], &bound);
            if shapes.is_empty() {
                break;
            }
        }
        for (zi, z) in parts.iter().enumerate() {
            if shapes.get(z).copied().unwrap_or(0) > 0 {
                let mut tuple = Vec::with_capacity(m + 1);
                tuple.push(singles[zi].clone());
                tuple.extend(factor_idx.iter().map(|&fi| singles[fi].clone()));
                result.push(tuple);
            }
        }
    }
    result.sort();
    let arc = std::sync::Arc::new(result);
    tuple_cache()
        .lock()
        .unwrap()
        .insert((r, d, m), arc.clone());
    Ok(arc)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
