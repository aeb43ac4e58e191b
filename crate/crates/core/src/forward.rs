//! One forward iteration and multi-step trajectories of the clustering
//! dynamics, at the point level and the gap level.
//!
//! A configuration is a finite circular sequence of `n` points. Each
//! point moves halfway toward one of its neighbors; a gap whose two
//! endpoints move toward each other closes and the pair merges. Merges
//! are detected from the direction pattern (Right at the left endpoint,
//! Left at the right endpoint), never from floating-point equality.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::laws::GapSequence;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Neighbor chosen by an independent fair coin.
    Alg1,
    /// Neighbor chosen so the conditional displacement is mean-zero:
    /// P(Right at i) = gap(i-1) / (gap(i-1) + gap(i)).
    Alg2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityMode {
    /// Multiply surviving gaps by 3/4, the model's rescale operator.
    Theoretical,
    /// Normalize the mean gap to exactly 1.
    Empirical,
    /// No rescale; used for unrescaled trajectory traces.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

/// Per-point movement choices for one step.
#[derive(Debug, Clone)]
pub struct DirectionField {
    pub dirs: Vec<Direction>,
    pub algorithm: Algorithm,
}

/// Outcome of one step's merge pattern.
///
/// `merged_gap_indices` lists gaps that closed (points i and i+1
/// co-located). `point_survivor[j]` is the new index of old point j;
/// both members of a merged pair map to the same new index.
#[derive(Debug, Clone)]
pub struct MergeRecord {
    pub merged_gap_indices: Vec<usize>,
    pub point_survivor: Vec<usize>,
}

impl MergeRecord {
    pub fn merge_count(&self) -> usize {
        self.merged_gap_indices.len()
    }
}

/// Per current point, the number of initial points absorbed into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genealogy {
    pub multiplicity: Vec<u64>,
}

impl Genealogy {
    pub fn unit(n: usize) -> Self {
        Self {
            multiplicity: vec![1; n],
        }
    }

    pub fn total(&self) -> u64 {
        self.multiplicity.iter().sum()
    }
}

/// Forward state: gaps, genealogy, and the index of the tracked Palm
/// point (index 0 of the original anchored configuration).
#[derive(Debug, Clone)]
pub struct ForwardState {
    pub gaps: GapSequence,
    pub genealogy: Genealogy,
    pub anchor: usize,
    pub t: u32,
}

impl ForwardState {
    pub fn new(gaps: GapSequence) -> Self {
        let n = gaps.len();
        Self {
            gaps,
            genealogy: Genealogy::unit(n),
            anchor: 0,
            t: 0,
        }
    }

    /// Gap at offset `i` from the tracked Palm point.
    pub fn palm_gap(&self, i: usize) -> f64 {
        let n = self.gaps.len();
        self.gaps.gaps[(self.anchor + i) % n]
    }
}

/// Probability that point `i` moves right under `algorithm`.
pub fn right_probability(gaps: &GapSequence, i: usize, algorithm: Algorithm) -> f64 {
    match algorithm {
        Algorithm::Alg1 => 0.5,
        Algorithm::Alg2 => {
            let n = gaps.len();
            let left = gaps.gaps[(i + n - 1) % n];
            let right = gaps.gaps[i];
            left / (left + right)
        }
    }
}

/// Draw one direction per point.
pub fn sample_directions(
    gaps: &GapSequence,
    algorithm: Algorithm,
    rng: &mut impl Rng,
) -> DirectionField {
    let dirs = (0..gaps.len())
        .map(|i| {
            let p = right_probability(gaps, i, algorithm);
            if rng.gen::<f64>() < p {
                Direction::Right
            } else {
                Direction::Left
            }
        })
        .collect();
    DirectionField { dirs, algorithm }
}

/// Apply the movement map to the gaps.
///
/// For gap i with endpoint directions (d_i, d_{i+1}):
///   (R,R) -> (g_i + g_{i+1})/2
///   (L,L) -> (g_{i-1} + g_i)/2
///   (L,R) -> g_{i-1}/2 + g_i + g_{i+1}/2
///   (R,L) -> 0, and i is recorded as merged.
/// Total length is preserved exactly up to rounding.
pub fn tentative_gaps(
    gaps: &GapSequence,
    dirs: &DirectionField,
) -> Result<(Vec<f64>, MergeRecord), CoreError> {
    let n = gaps.len();
    if dirs.dirs.len() != n {
        return Err(CoreError::TooFewGaps(dirs.dirs.len()));
    }
    let g = &gaps.gaps;
    let mut tentative = Vec::with_capacity(n);
    let mut merged = Vec::new();
    for i in 0..n {
        let prev = g[(i + n - 1) % n];
        let next = g[(i + 1) % n];
        let here = g[i];
        let di = dirs.dirs[i];
        let dn = dirs.dirs[(i + 1) % n];
        let v = match (di, dn) {
            (Direction::Right, Direction::Right) => 0.5 * (here + next),
            (Direction::Left, Direction::Left) => 0.5 * (prev + here),
            (Direction::Left, Direction::Right) => 0.5 * prev + here + 0.5 * next,
            (Direction::Right, Direction::Left) => {
                merged.push(i);
                0.0
            }
        };
        tentative.push(v);
    }
    // the (R,L) pattern at i forces L at i+1, so merges are never adjacent
    for w in merged.windows(2) {
        assert!(w[1] - w[0] >= 2, "adjacent merges at {} and {}", w[0], w[1]);
    }
    if merged.len() >= 2 {
        let first = merged[0];
        let last = *merged.last().unwrap();
        assert!(first + n - last >= 2, "cyclically adjacent merges");
    }
    let point_survivor = survivor_map(n, &merged);
    Ok((
        tentative,
        MergeRecord {
            merged_gap_indices: merged,
            point_survivor,
        },
    ))
}

/// Old point index -> new point index, given the merged gaps.
///
/// New indices are assigned so that new gap k (the k-th unmerged gap in
/// index order) lies to the right of new point k. The right member of a
/// merged pair is absorbed into the left one.
fn survivor_map(n: usize, merged: &[usize]) -> Vec<usize> {
    let is_merged = |i: usize| merged.binary_search(&i).is_ok();
    let mut map = vec![usize::MAX; n];
    // count of unmerged gaps with index < i
    let mut unmerged_before = vec![0usize; n + 1];
    for i in 0..n {
        unmerged_before[i + 1] = unmerged_before[i] + usize::from(!is_merged(i));
    }
    for j in 0..n {
        let absorbed = is_merged((j + n - 1) % n);
        if absorbed {
            continue;
        }
        // right gap of point j: gap j, or gap j+1 when gap j merged
        let rg = if is_merged(j) { (j + 1) % n } else { j };
        map[j] = unmerged_before[rg];
    }
    for j in 0..n {
        if map[j] == usize::MAX {
            // absorbed: inherit the representative's index
            map[j] = map[(j + n - 1) % n];
        }
    }
    map
}

/// Delete merged gaps, reindex, and rescale.
pub fn fold_and_rescale(
    tentative: &[f64],
    merges: &MergeRecord,
    mode: IntensityMode,
) -> Result<GapSequence, CoreError> {
    for &i in &merges.merged_gap_indices {
        debug_assert_eq!(tentative[i], 0.0);
    }
    let surviving: Vec<f64> = tentative
        .iter()
        .enumerate()
        .filter(|(i, _)| merges.merged_gap_indices.binary_search(i).is_err())
        .map(|(_, &v)| v)
        .collect();
    if surviving.len() < 2 {
        return Err(CoreError::Degenerate);
    }
    let factor = match mode {
        IntensityMode::Theoretical => 0.75,
        IntensityMode::Empirical => surviving.len() as f64 / surviving.iter().sum::<f64>(),
        IntensityMode::None => 1.0,
    };
    GapSequence::new(surviving.into_iter().map(|v| v * factor).collect())
}

/// One full forward step: sample directions, move, fold, rescale, and
/// carry genealogy and the Palm anchor through the merge pattern.
pub fn forward_step(
    state: &ForwardState,
    algorithm: Algorithm,
    mode: IntensityMode,
    rng: &mut impl Rng,
) -> Result<(ForwardState, MergeRecord), CoreError> {
    if algorithm == Algorithm::Alg2 && mode == IntensityMode::Theoretical {
        return Err(CoreError::TheoreticalRescaleUnavailable);
    }
    let dirs = sample_directions(&state.gaps, algorithm, rng);
    forward_step_with_directions(state, &dirs, mode)
}

/// Deterministic remainder of a step, given the direction field.
pub fn forward_step_with_directions(
    state: &ForwardState,
    dirs: &DirectionField,
    mode: IntensityMode,
) -> Result<(ForwardState, MergeRecord), CoreError> {
    let (tentative, merges) = tentative_gaps(&state.gaps, dirs)?;
    let gaps = fold_and_rescale(&tentative, &merges, mode)?;
    let m = gaps.len();
    let mut multiplicity = vec![0u64; m];
    for (j, &mult) in state.genealogy.multiplicity.iter().enumerate() {
        multiplicity[merges.point_survivor[j]] += mult;
    }
    let next = ForwardState {
        gaps,
        genealogy: Genealogy { multiplicity },
        anchor: merges.point_survivor[state.anchor],
        t: state.t + 1,
    };
    Ok((next, merges))
}

/// A recorded forward run.
#[derive(Debug, Clone)]
pub struct ForwardTrajectory {
    pub states: Vec<ForwardState>,
    pub merges: Vec<MergeRecord>,
    /// Point positions before any rescale, in original length units;
    /// recorded when requested (tree-figure data).
    pub unrescaled: Option<Vec<PointConfiguration>>,
}

impl ForwardTrajectory {
    pub fn final_state(&self) -> &ForwardState {
        self.states.last().unwrap()
    }
}

/// Run `steps` forward steps from `initial`.
pub fn run_forward(
    initial: ForwardState,
    steps: u32,
    algorithm: Algorithm,
    mode: IntensityMode,
    stream: RngStream,
    record_unrescaled: bool,
) -> Result<ForwardTrajectory, CoreError> {
    let mut rng = stream.rng();
    let mut unrescaled = record_unrescaled.then(|| {
        vec![PointConfiguration::from_gaps(&initial.gaps, 0.0)]
    });
    let mut states = vec![initial];
    let mut merges = Vec::new();
    for _ in 0..steps {
        let state = states.last().unwrap();
        if algorithm == Algorithm::Alg2 && mode == IntensityMode::Theoretical {
            return Err(CoreError::TheoreticalRescaleUnavailable);
        }
        let dirs = sample_directions(&state.gaps, algorithm, &mut rng);
        if let Some(trace) = unrescaled.as_mut() {
            let points = trace.last().unwrap();
            trace.push(points.step(&dirs)?);
            let (next, record) =
                forward_step_with_directions(state, &dirs, mode)?;
            states.push(next);
            merges.push(record);
        } else {
            let (next, record) = forward_step_with_directions(state, &dirs, mode)?;
            states.push(next);
            merges.push(record);
        }
    }
    Ok(ForwardTrajectory {
        states,
        merges,
        unrescaled,
    })
}

/// Point-level configuration on a circle.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    /// Strictly increasing positions in [anchor, anchor + circumference).
    pub positions: Vec<f64>,
    pub circumference: f64,
}

impl PointConfiguration {
    pub fn from_gaps(gaps: &GapSequence, origin: f64) -> Self {
        let mut positions = Vec::with_capacity(gaps.len());
        let mut p = origin;
        for &g in &gaps.gaps {
            positions.push(p);
            p += g;
        }
        Self {
            positions,
            circumference: p - origin,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Gap sequence read off the positions (gap i = p_{i+1} - p_i,
    /// wrapping at the end).
    pub fn gap_sequence(&self) -> Result<GapSequence, CoreError> {
        let n = self.positions.len();
        let mut gaps = Vec::with_capacity(n);
        for i in 0..n {
            let d = if i + 1 < n {
                self.positions[i + 1] - self.positions[i]
            } else {
                self.positions[0] + self.circumference - self.positions[i]
            };
            gaps.push(d);
        }
        GapSequence::new(gaps)
    }

    /// Move every point halfway toward its chosen neighbor; co-locate
    /// merged pairs at the midpoint of the closed gap. No rescale.
    ///
    /// The output is ordered by the same survivor indexing that the
    /// gap-level step uses, so the two pipelines stay aligned even when
    /// a merge straddles the wrap.
    pub fn step(&self, dirs: &DirectionField) -> Result<PointConfiguration, CoreError> {
        let n = self.positions.len();
        let gaps = self.gap_sequence()?;
        let g = &gaps.gaps;
        let mut moved = Vec::with_capacity(n);
        for i in 0..n {
            let p = match dirs.dirs[i] {
                Direction::Right => self.positions[i] + 0.5 * g[i],
                Direction::Left => self.positions[i] - 0.5 * g[(i + n - 1) % n],
            };
            moved.push(p);
        }
        let mut merged = Vec::new();
        for i in 0..n {
            let dn = dirs.dirs[(i + 1) % n];
            if dirs.dirs[i] == Direction::Right && dn == Direction::Left {
                merged.push(i);
            }
        }
        let m = n - merged.len();
        if m < 2 {
            return Err(CoreError::Degenerate);
        }
        let map = survivor_map(n, &merged);
        let is_merged = |i: usize| merged.binary_search(&i).is_ok();
        let mut positions = vec![f64::NAN; m];
        for j in 0..n {
            let absorbed = is_merged((j + n - 1) % n);
            if !absorbed {
                positions[map[j]] = moved[j];
            }
        }
        // cyclic order is preserved (non-merging neighbors cannot
        // cross); unwrap so positions increase within one turn
        for k in 1..m {
            if positions[k] < positions[k - 1] {
                positions[k] += self.circumference;
            }
        }
        Ok(PointConfiguration {
            positions,
            circumference: self.circumference,
        })
    }

    pub fn rescale(&self, factor: f64) -> PointConfiguration {
        PointConfiguration {
            positions: self.positions.iter().map(|p| p * factor).collect(),
            circumference: self.circumference * factor,
        }
    }
}

/// Translate a uniformly chosen point to the origin and re-index the
/// configuration so that point has index 0.
pub fn palm_shift(points: &PointConfiguration, rng: &mut impl Rng) -> PointConfiguration {
    let n = points.len();
    let k = rng.gen_range(0..n);
    let origin = points.positions[k];
    let mut positions = Vec::with_capacity(n);
    for i in 0..n {
        let p = points.positions[(k + i) % n];
        let shifted = if (k + i) < n {
            p - origin
        } else {
            p - origin + points.circumference
        };
        positions.push(shifted);
    }
    PointConfiguration {
        positions,
        circumference: points.circumference,
    }
}
