//! Random numeric instantiation of a network and the rank questions asked of
//! it.
//!
//! Generic (normal) rank is evaluated at random module values: a rank
//! deficiency that holds identically in the modules shows up at every draw,
//! while an accidental one at a single draw is washed out by taking the
//! maximum over several independent trials.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::combinatorics::{mask_structural_rank, max_vertex_disjoint_paths};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::model::{NetworkModel, VertexSet};
use crate::structure::{
    function_set_from_pattern, structural_pattern, EntryClass, FunctionSet, StructuralPattern,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_TRIALS: usize = 5;

/// Module values are drawn uniformly from this range.
pub const MODULE_RANGE: (f64, f64) = (0.25, 1.75);

/// Largest accepted 2-norm condition number of `I - G`.
pub const CONDITION_LIMIT: f64 = 1e5;

/// Retries after the first draw before giving up.
const MAX_RETRIES: usize = 8;

/// One real instantiation of every module and the resulting `T`.
#[derive(Clone, Debug)]
pub struct NumericInstance {
    /// `g[(to - 1, from - 1)]` holds the module of edge `(from, to)`.
    pub g: DMatrix<f64>,
    /// `(I - g)^-1`, with structurally zero entries stored as exact zeros.
    pub t: DMatrix<f64>,
    pub seed: u64,
    pub trial: u64,
}

impl NumericInstance {
    /// Module value on edge `(from, to)`.
    pub fn module(&self, from: usize, to: usize) -> f64 {
        self.g[(to - 1, from - 1)]
    }

    /// `T[row][col]`, 1-based.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.t[(row - 1, col - 1)]
    }

    /// `T[rows][cols]` as a dense matrix.
    pub fn submatrix(&self, rows: &VertexSet, cols: &VertexSet) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            self.t[(rows.as_slice()[r] - 1, cols.as_slice()[c] - 1)]
        })
    }
}

/// Draws trial 0 for `seed`.
pub fn instantiate(m: &NetworkModel, seed: u64) -> Result<NumericInstance> {
    instantiate_trial(m, &structural_pattern(m), seed, 0)
}

/// Draws an instance from the RNG stream `trial` of `seed`. Each trial is
/// independent of how many trials are drawn in total.
pub fn instantiate_trial(
    m: &NetworkModel,
    pattern: &StructuralPattern,
    seed: u64,
    trial: u64,
) -> Result<NumericInstance> {
    let n = m.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);

    let draw = |rng: &mut ChaCha8Rng| {
        let mut g = DMatrix::<f64>::zeros(n, n);
        for &(from, to) in m.edges() {
            g[(to - 1, from - 1)] = rng.random_range(MODULE_RANGE.0..=MODULE_RANGE.1);
        }
        g
    };

    let mut g = draw(&mut rng);
    for _ in 0..=MAX_RETRIES {
        let a = DMatrix::<f64>::identity(n, n) - &g;
        if condition_number(&a) <= CONDITION_LIMIT {
            if let Some(mut t) = a.clone().lu().try_inverse() {
                let scale = t.amax().max(1.0);
                for row in 1..=n {
                    for col in 1..=n {
                        if pattern.get(row, col) == EntryClass::Zero {
                            debug_assert!(t[(row - 1, col - 1)].abs() <= 1e-12 * scale);
                            t[(row - 1, col - 1)] = 0.0;
                        }
                    }
                }
                return Ok(NumericInstance { g, t, seed, trial });
            }
        }
        // Pull every eigenvalue of g inside radius 1/2; a draw that is bad
        // for another reason is replaced.
        let rho = spectral_radius(&g);
        if rho.is_finite() && rho > 0.5 + 1e-9 {
            g /= 2.0 * rho;
        } else {
            g = draw(&mut rng);
        }
    }
    Err(Error::IllConditioned {
        attempts: MAX_RETRIES + 1,
    })
}

fn condition_number(a: &DMatrix<f64>) -> f64 {
    let s = a.clone().singular_values();
    let max = s.max();
    let min = s.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn spectral_radius(g: &DMatrix<f64>) -> f64 {
    match g.clone().try_schur(f64::EPSILON, 10_000) {
        Some(schur) => schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
        // infinity-norm bound
        None => g
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max),
    }
}

/// Observed rank of a matrix (or the best of several trials).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    /// Ratio between the smallest accepted and the largest rejected singular
    /// value; `None` when nothing was rejected or nothing accepted.
    pub gap: Option<f64>,
    pub trials: usize,
}

/// Counts singular values above `tolerance * sigma_max`.
pub fn numeric_rank(matrix: &DMatrix<f64>, tolerance: f64) -> RankReport {
    if matrix.is_empty() {
        return RankReport {
            rank: 0,
            gap: None,
            trials: 1,
        };
    }
    let mut s: Vec<f64> = matrix.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let largest = s[0];
    if largest <= 0.0 {
        return RankReport {
            rank: 0,
            gap: None,
            trials: 1,
        };
    }
    let rank = s.iter().take_while(|&&v| v > tolerance * largest).count();
    let gap = (rank > 0 && rank < s.len()).then(|| {
        if s[rank] > 0.0 {
            s[rank - 1] / s[rank]
        } else {
            f64::INFINITY
        }
    });
    RankReport {
        rank,
        gap,
        trials: 1,
    }
}

/// A fixed family of independent instantiations sharing one seed.
#[derive(Clone, Debug)]
pub struct InstanceSet {
    instances: Vec<NumericInstance>,
    tolerance: f64,
}

impl InstanceSet {
    pub fn new(
        m: &NetworkModel,
        pattern: &StructuralPattern,
        trials: usize,
        seed: u64,
        tolerance: f64,
        execution: Execution,
    ) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidOption("trials must be at least 1".into()));
        }
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::InvalidOption("tolerance must be positive".into()));
        }
        let ids: Vec<u64> = (0..trials as u64).collect();
        let instances =
            exec::try_map(execution, &ids, |&k| instantiate_trial(m, pattern, seed, k))?;
        Ok(Self {
            instances,
            tolerance,
        })
    }

    pub fn instances(&self) -> &[NumericInstance] {
        &self.instances
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Maximum observed rank of `T[rows][cols]` over all trials.
    pub fn rank(&self, rows: &VertexSet, cols: &VertexSet) -> RankReport {
        combine_trials(
            self.instances
                .iter()
                .map(|inst| numeric_rank(&inst.submatrix(rows, cols), self.tolerance)),
        )
    }
}

fn combine_trials(reports: impl Iterator<Item = RankReport>) -> RankReport {
    let reports: Vec<RankReport> = reports.collect();
    let rank = reports.iter().map(|r| r.rank).max().unwrap_or(0);
    let gap = reports
        .iter()
        .filter(|r| r.rank == rank)
        .filter_map(|r| r.gap)
        .reduce(f64::min);
    RankReport {
        rank,
        gap,
        trials: reports.len(),
    }
}

/// Generic rank of `T[rows][cols]`, checked against the maximum number of
/// vertex-disjoint paths from `cols` to `rows`; the two must coincide.
pub fn generic_rank(
    m: &NetworkModel,
    rows: &VertexSet,
    cols: &VertexSet,
    trials: usize,
    seed: u64,
) -> Result<RankReport> {
    let set = InstanceSet::new(
        m,
        &structural_pattern(m),
        trials,
        seed,
        DEFAULT_TOLERANCE,
        Execution::Sequential,
    )?;
    let report = set.rank(rows, cols);
    let paths = max_vertex_disjoint_paths(m, cols, rows);
    if report.rank != paths {
        return Err(Error::RankMismatch {
            numeric: report.rank,
            paths,
        });
    }
    Ok(report)
}

/// Knobs for the iterative elimination of dependent entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EliminationOptions {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Largest square submatrix examined; `None` means `min(|R|, |C|)`.
    pub max_subset: Option<usize>,
    pub execution: Execution,
}

impl Default for EliminationOptions {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            seed: 42,
            tolerance: DEFAULT_TOLERANCE,
            max_subset: None,
            execution: Execution::default(),
        }
    }
}

/// One removal step: the entry `T[row][col]` was dropped because
/// `T[rows][cols]` is rank deficient while structurally full rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryRemoval {
    pub row: usize,
    pub col: usize,
    pub rows: VertexSet,
    pub cols: VertexSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Elimination {
    pub reduced: FunctionSet,
    pub log: Vec<EntryRemoval>,
    /// Largest subset size searched.
    pub max_subset: usize,
    /// True when `max_subset < min(|R|, |C|)`.
    pub truncated: bool,
}

/// Square subset pair, as positions into the sorted `C` (rows) and `R` (cols).
#[derive(Clone, Debug)]
struct Candidate {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

/// Sparsified copy of `T_{C,R}` for every trial plus the shared nonzero mask.
struct Sparsified {
    n_rows: usize,
    n_cols: usize,
    mask: Vec<bool>,
    in_f: Vec<bool>,
    matrices: Vec<DMatrix<f64>>,
}

impl Sparsified {
    fn is_dependent(&self, cand: &Candidate, tolerance: f64) -> bool {
        let k = cand.rows.len();
        let mut sub_mask = Vec::with_capacity(k * k);
        let mut has_function = false;
        for &r in &cand.rows {
            for &c in &cand.cols {
                let idx = r * self.n_cols + c;
                sub_mask.push(self.mask[idx]);
                has_function |= self.in_f[idx];
            }
        }
        if !has_function || mask_structural_rank(&sub_mask, k, k) < k {
            return false;
        }
        // a single full-rank trial settles it
        !self.matrices.iter().any(|t| {
            let sub = DMatrix::from_fn(k, k, |a, b| t[(cand.rows[a], cand.cols[b])]);
            numeric_rank(&sub, tolerance).rank == k
        })
    }

    fn remove(&mut self, r: usize, c: usize) {
        let idx = r * self.n_cols + c;
        self.mask[idx] = false;
        self.in_f[idx] = false;
        for t in &mut self.matrices {
            t[(r, c)] = 0.0;
        }
        debug_assert!(r < self.n_rows);
    }
}

fn square_candidates(n_rows: usize, n_cols: usize, max_size: usize) -> Vec<Candidate> {
    let row_ids = VertexSet::from_unsorted((0..n_rows).collect());
    let col_ids = VertexSet::from_unsorted((0..n_cols).collect());
    let mut out = Vec::new();
    for k in 2..=max_size {
        let col_sets = col_ids.subsets(k);
        for rows in row_ids.subsets(k) {
            for cols in &col_sets {
                out.push(Candidate {
                    rows: rows.as_slice().to_vec(),
                    cols: cols.as_slice().to_vec(),
                });
            }
        }
    }
    out
}

/// Iteratively removes dependent entries of `T_{C,R}`.
///
/// Square subsets are scanned by increasing size, measured subset outermost
/// and both lexicographic. On the first subset whose sparsified submatrix is
/// structurally full rank but numerically rank deficient, the smallest
/// `(row, col)` entry still in the function set is zeroed and the scan
/// restarts from size 2.
pub fn eliminate_dependent_functions(
    m: &NetworkModel,
    opts: &EliminationOptions,
) -> Result<Elimination> {
    let pattern = structural_pattern(m);
    let instances = InstanceSet::new(
        m,
        &pattern,
        opts.trials,
        opts.seed,
        opts.tolerance,
        opts.execution,
    )?;
    eliminate_with_instances(m, &pattern, &instances, opts)
}

pub(crate) fn eliminate_with_instances(
    m: &NetworkModel,
    pattern: &StructuralPattern,
    instances: &InstanceSet,
    opts: &EliminationOptions,
) -> Result<Elimination> {
    let rows = m.measured();
    let cols = m.excited();
    let full = rows.len().min(cols.len());
    let max_subset = match opts.max_subset {
        Some(k) if k < 2 => {
            return Err(Error::InvalidOption("max_subset must be at least 2".into()));
        }
        Some(k) => k.min(full),
        None => full,
    };

    let mut reduced = function_set_from_pattern(m, pattern);
    let (n_rows, n_cols) = (rows.len(), cols.len());
    let mut state = Sparsified {
        n_rows,
        n_cols,
        mask: Vec::with_capacity(n_rows * n_cols),
        in_f: Vec::with_capacity(n_rows * n_cols),
        matrices: instances
            .instances()
            .iter()
            .map(|inst| inst.submatrix(rows, cols))
            .collect(),
    };
    for j in rows.iter() {
        for i in cols.iter() {
            state.mask.push(pattern.is_nonzero(j, i));
            state.in_f.push(reduced.contains(j, i));
        }
    }

    let candidates = square_candidates(n_rows, n_cols, max_subset);
    let mut log = Vec::new();
    while let Some(hit) = exec::position_first(opts.execution, &candidates, |c| {
        state.is_dependent(c, opts.tolerance)
    }) {
        let cand = &candidates[hit];
        let (r, c) = cand
            .rows
            .iter()
            .flat_map(|&r| cand.cols.iter().map(move |&c| (r, c)))
            .find(|&(r, c)| state.in_f[r * n_cols + c])
            .expect("dependent subset holds a function entry");
        let (row, col) = (rows.as_slice()[r], cols.as_slice()[c]);
        state.remove(r, c);
        reduced.remove(row, col);
        log.push(EntryRemoval {
            row,
            col,
            rows: cand.rows.iter().map(|&k| rows.as_slice()[k]).collect(),
            cols: cand.cols.iter().map(|&k| cols.as_slice()[k]).collect(),
        });
    }

    Ok(Elimination {
        reduced,
        log,
        max_subset,
        truncated: max_subset < full,
    })
}
