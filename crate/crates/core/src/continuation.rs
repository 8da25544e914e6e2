//! Parameter continuation with eigenvalue tracking and bifurcation detection.
//!
//! A sweep follows one stationary branch in `gamma` or `mu`. At every step the
//! isolated eigenvalues in the upper half plane are matched to tracks, their
//! eigenvectors are PT-normalized, the adjoint orientation is carried along
//! the track, and the Krein quantity is evaluated. Pairs of tracks that
//! collide are examined on a locally refined parameter grid and the collision
//! is classified.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::MappedGrid;
use crate::krein::{continue_adjoint_sign, krein_quantity, pt_phase_fix, signature, AdjointAnchor, PhaseOptions};
use crate::linearization::{
    overlap, set_distance, solve_spectrum, stability_eigenvalues, Classification, SpectralThresholds,
    SpectrumSnapshot,
};
use crate::stationary::{newton_solve, seed_state, NewtonOptions, Problem, StationaryState};

type Cvec = Vec<Complex64>;

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Gamma,
    Mu,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Gamma => "gamma",
            SweepAxis::Mu => "mu",
        }
    }
}

/// Thresholds of the tracking and coalescence logic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingOptions {
    /// Largest eigenvalue displacement accepted between adjacent steps.
    pub radius: f64,
    /// `|lambda_a - lambda_b|` below which two tracks are examined for coalescence.
    pub proximity: f64,
    /// Eigenvector distance at or below which a coalescence is defective.
    pub d_defective: f64,
    /// Eigenvector distance at or above which two modes are distinct.
    pub d_distinct: f64,
    /// Number of local refinements around an event.
    pub refine_depth: usize,
    /// Parameter distance around an event within which `K` may vanish.
    pub delta_coal: f64,
    /// Eigenvalues with `|lambda|` above this are not tracked.
    pub track_max: f64,
    /// Number of post-split samples used by the square-root fit.
    pub fit_samples: usize,
    /// `|Re K|` below which the signature is undefined.
    pub krein_floor: f64,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        TrackingOptions {
            radius: 0.25,
            proximity: 0.05,
            d_defective: 0.05,
            d_distinct: 0.5,
            refine_depth: 8,
            delta_coal: 1e-3,
            track_max: 40.0,
            fit_samples: 6,
            krein_floor: 1e-8,
        }
    }
}

/// Everything needed to run one sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Grid, potential and the fixed parameters. The swept one is overridden.
    pub problem: Problem,
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    /// Step magnitude; the direction follows from `start` and `stop`.
    pub step: f64,
    pub branch: String,
    pub newton: NewtonOptions,
    pub spectral: SpectralThresholds,
    pub phase: PhaseOptions,
    pub tracking: TrackingOptions,
    /// Orientation rule for adjoints without a predecessor. `None` picks the
    /// Hamiltonian rule for sweeps starting at `gamma = 0` and the linear
    /// limit rule otherwise.
    pub anchor: Option<AdjointAnchor>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameters(format!("sweep step must be positive, got {}", self.step)));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidParameters("sweep range must be finite".into()));
        }
        let t = &self.tracking;
        if !(t.d_defective < t.d_distinct) {
            return Err(Error::InvalidParameters("d_defective must be below d_distinct".into()));
        }
        Ok(())
    }

    fn anchor(&self) -> AdjointAnchor {
        self.anchor.unwrap_or(match self.axis {
            SweepAxis::Gamma if self.start == 0.0 => AdjointAnchor::Hamiltonian,
            _ => {
                if self.axis == SweepAxis::Mu && self.problem.params().gamma == 0.0 {
                    AdjointAnchor::Hamiltonian
                } else {
                    AdjointAnchor::LinearLimit
                }
            }
        })
    }

    fn problem_at(&self, p: f64) -> Result<Problem> {
        let pr = self.problem.params();
        match self.axis {
            SweepAxis::Gamma => self.problem.with_mu_gamma(pr.mu, p),
            SweepAxis::Mu => self.problem.with_mu_gamma(p, pr.gamma),
        }
    }

    fn direction(&self) -> f64 {
        if self.stop >= self.start {
            1.0
        } else {
            -1.0
        }
    }

    fn nominal_params(&self) -> Vec<f64> {
        let span = (self.stop - self.start).abs();
        let n = (span / self.step + 1e-9).floor() as usize;
        let dir = self.direction();
        let mut v: Vec<f64> = (0..=n).map(|k| self.start + dir * self.step * k as f64).collect();
        if (v[n] - self.stop).abs() > 1e-9 * self.step {
            v.push(self.stop);
        }
        v
    }
}

/// Kinds of classified collisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    DefectiveInstability,
    DefectiveSafePassage,
    NearPass,
    ZeroCollision,
    /// Eigenvector distances stayed between the thresholds at full refinement.
    Unresolved,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::DefectiveInstability => "defective-instability",
            EventKind::DefectiveSafePassage => "defective-safe-passage",
            EventKind::NearPass => "near-pass",
            EventKind::ZeroCollision => "zero-collision",
            EventKind::Unresolved => "unresolved",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluation of a candidate pair at a given parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairProbe {
    pub param: f64,
    pub lambda_a: Complex64,
    pub lambda_b: Complex64,
    /// `min ||v_a -/+ v_b||` for unit eigenvectors.
    pub d_vec: f64,
    /// Same for the adjoint eigenvectors, when both are available.
    pub d_adj: Option<f64>,
    /// Whether the pair has left the imaginary axis.
    pub off_axis: bool,
}

impl PairProbe {
    pub fn gap(&self) -> f64 {
        (self.lambda_a - self.lambda_b).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoalescenceVerdict {
    Defective,
    Distinct,
    Unresolved,
}

/// Eigenvector-difference data around a close approach.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalescenceEvidence {
    /// Probes ordered by parameter.
    pub samples: Vec<PairProbe>,
    pub min_d_vec: f64,
    pub min_d_adj: Option<f64>,
    pub verdict: CoalescenceVerdict,
}

/// Classifies a window of probes by its smallest eigenvector distance.
///
/// The pair is defective when the eigenvector distance (and the adjoint
/// distance, when available) drops to `d_defective`, distinct when it stays
/// at or above `d_distinct`.
pub fn detect_coalescence(window: &[PairProbe], opts: &TrackingOptions) -> CoalescenceEvidence {
    let mut samples = window.to_vec();
    samples.sort_by(|a, b| a.param.total_cmp(&b.param));
    let min_d_vec = samples.iter().map(|p| p.d_vec).fold(f64::INFINITY, f64::min);
    let adj: Vec<f64> = samples.iter().filter_map(|p| p.d_adj).collect();
    let min_d_adj = (!adj.is_empty()).then(|| adj.iter().copied().fold(f64::INFINITY, f64::min));
    let d = min_d_vec.max(min_d_adj.unwrap_or(0.0));
    let verdict = if d <= opts.d_defective {
        CoalescenceVerdict::Defective
    } else if min_d_vec >= opts.d_distinct {
        CoalescenceVerdict::Distinct
    } else {
        CoalescenceVerdict::Unresolved
    };
    CoalescenceEvidence { samples, min_d_vec, min_d_adj, verdict }
}

/// Golden-section search for the closest approach of a pair on `[lo, hi]`.
///
/// Runs `refine_depth` contractions, and up to `refine_depth` more while the
/// verdict is unresolved. All probes are kept as evidence.
pub fn refine_approach<F>(lo: f64, hi: f64, opts: &TrackingOptions, mut probe: F) -> Result<CoalescenceEvidence>
where
    F: FnMut(f64) -> Result<PairProbe>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut samples = Vec::new();
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let pc = probe(c)?;
    let pd = probe(d)?;
    let (mut fc, mut fd) = (pc.gap(), pd.gap());
    samples.push(pc);
    samples.push(pd);
    for it in 0..2 * opts.refine_depth {
        if it >= opts.refine_depth
            && detect_coalescence(&samples, opts).verdict != CoalescenceVerdict::Unresolved
        {
            break;
        }
        if samples.iter().any(|p| p.off_axis) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            let p = probe(c)?;
            fc = p.gap();
            samples.push(p);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            let p = probe(d)?;
            fd = p.gap();
            samples.push(p);
        }
    }
    Ok(detect_coalescence(&samples, opts))
}

/// Bisection for the parameter at which a pair leaves the imaginary axis.
///
/// `lo` is on-axis, `hi` off-axis. Returns the final bracket and all probes.
pub fn refine_transition<F>(lo: f64, hi: f64, depth: usize, mut probe: F) -> Result<((f64, f64), Vec<PairProbe>)>
where
    F: FnMut(f64) -> Result<PairProbe>,
{
    let (mut a, mut b) = (lo, hi);
    let mut samples = Vec::new();
    for _ in 0..depth {
        let mid = 0.5 * (a + b);
        let p = probe(mid)?;
        if p.off_axis {
            b = mid;
        } else {
            a = mid;
        }
        samples.push(p);
    }
    Ok(((a, b), samples))
}

/// Result of fitting `|Re lambda| = C |p - p0|^e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtFit {
    pub exponent: f64,
    pub param0: f64,
    pub prefactor: f64,
    pub samples: usize,
}

/// Least-squares fit of `log |Re lambda|` against `log |p - p0|`, jointly
/// over the exponent and `p0`.
///
/// `samples` are `(param, |Re lambda|)` on one side of the split; `p0` is
/// searched between `p0_range.0` and `p0_range.1`, which must not contain any
/// sample.
pub fn fit_sqrt_splitting(samples: &[(f64, f64)], p0_range: (f64, f64)) -> Result<SqrtFit> {
    let pts: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.1 > 0.0).collect();
    if pts.len() < 5 {
        return Err(Error::TooFewSamples(pts.len()));
    }
    let side = if pts[0].0 > p0_range.0 { 1.0 } else { -1.0 };
    let line = |p0: f64| -> Option<(f64, f64, f64)> {
        let mut xs = Vec::with_capacity(pts.len());
        for &(p, r) in &pts {
            let t = side * (p - p0);
            if t <= 0.0 {
                return None;
            }
            xs.push((t.ln(), r.ln()));
        }
        let n = xs.len() as f64;
        let mx = xs.iter().map(|v| v.0).sum::<f64>() / n;
        let my = xs.iter().map(|v| v.1).sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|v| (v.0 - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum();
        if sxx <= 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        let icpt = my - slope * mx;
        let sse: f64 = xs.iter().map(|v| (v.1 - icpt - slope * v.0).powi(2)).sum();
        Some((sse, slope, icpt))
    };
    let cost = |p0: f64| line(p0).map(|v| v.0).unwrap_or(f64::INFINITY);
    // Coarse scan, then golden-section polish around the best cell.
    let (lo, hi) = (p0_range.0.min(p0_range.1), p0_range.0.max(p0_range.1));
    let n_scan = 200;
    let h = (hi - lo) / n_scan as f64;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=n_scan {
        let p = lo + h * k as f64;
        let c = cost(p);
        if c < best.0 {
            best = (c, p);
        }
    }
    let (mut a, mut b) = ((best.1 - h).max(lo), (best.1 + h).min(hi));
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    for _ in 0..100 {
        let c = b - INV_PHI * (b - a);
        let d = a + INV_PHI * (b - a);
        if cost(c) <= cost(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let mut p0 = 0.5 * (a + b);
    if cost(p0) > best.0 {
        p0 = best.1;
    }
    let (_, slope, icpt) = line(p0).ok_or(Error::TooFewSamples(0))?;
    Ok(SqrtFit { exponent: slope, param0: p0, prefactor: icpt.exp(), samples: pts.len() })
}

/// One sample on a track.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSample {
    pub param: f64,
    pub lambda: Complex64,
    pub classification: Classification,
    pub krein: Option<Complex64>,
    pub signature: Option<i8>,
    /// PT phase rotation applied to the eigenvector.
    pub phase_theta: Option<f64>,
    pub adjoint_sign: i8,
    /// Near the continuous band; signatures there are not asserted.
    pub frozen: bool,
    /// Orientation came from the anchor rule rather than continuation.
    pub anchored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Alive,
    Merged,
    OffAxis,
    Lost,
}

impl TrackStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrackStatus::Alive => "alive",
            TrackStatus::Merged => "merged",
            TrackStatus::OffAxis => "off-axis",
            TrackStatus::Lost => "lost",
        }
    }
}

/// Eigenvectors carried from one step to the next.
#[derive(Debug, Clone)]
struct TrackVectors {
    y: Cvec,
    z: Cvec,
    /// Oriented adjoint, PT-normalized when on-axis.
    adjoint: Option<(Cvec, Cvec)>,
    on_axis: bool,
}

/// History of one eigenvalue along the sweep.
#[derive(Debug, Clone)]
pub struct BranchTrack {
    pub branch_id: usize,
    pub samples: Vec<TrackSample>,
    pub status: TrackStatus,
    last: Option<TrackVectors>,
}

impl BranchTrack {
    pub fn last_sample(&self) -> Option<&TrackSample> {
        self.samples.last()
    }

    /// Last defined signature at least `guard` away from `param` on the
    /// on-axis part of the track; falls back to the last defined one.
    ///
    /// Samples near the band edge are used only when the track has no
    /// other defined signature, as happens for an eigenvalue that leaves
    /// the band just before a collision.
    pub fn signature_before(&self, param: f64, guard: f64) -> Option<i8> {
        let on_axis = |frozen: bool| {
            move |s: &&TrackSample| {
                s.classification == Classification::IsolatedImaginary && s.frozen == frozen && s.signature.is_some()
            }
        };
        let mut defined: Vec<&TrackSample> = self.samples.iter().filter(on_axis(false)).collect();
        if defined.is_empty() {
            defined = self.samples.iter().filter(on_axis(true)).collect();
        }
        defined
            .iter()
            .rev()
            .find(|s| (s.param - param).abs() >= guard)
            .or(defined.last())
            .and_then(|s| s.signature)
    }
}

/// A classified collision.
#[derive(Debug, Clone)]
pub struct BifurcationEvent {
    pub kind: EventKind,
    /// Best estimate of the collision parameter.
    pub param_at: f64,
    /// Bracket from the local refinement.
    pub bracket: (f64, f64),
    pub lambda_at: Complex64,
    pub branch_ids: (usize, Option<usize>),
    pub pre_signatures: (Option<i8>, Option<i8>),
    pub evidence: Option<CoalescenceEvidence>,
    /// `(param, |Re lambda|)` after the split.
    pub post_split: Vec<(f64, f64)>,
    pub fit: Option<SqrtFit>,
    /// Set when an instability follows a collision of equal signatures.
    pub theory_violation: bool,
    /// All four members `lambda, -lambda, conj, -conj` present after the split.
    pub quadruplet_closed: Option<bool>,
}

/// Summary of one accepted parameter step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub param: f64,
    pub mu: f64,
    pub gamma: f64,
    pub power: f64,
    pub residual: f64,
    pub iterations: usize,
    pub unstable: bool,
    pub max_re: f64,
    /// Eigenvalues with classification, sorted by `(Im, Re)`.
    pub spectrum: Vec<(Complex64, Classification)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub param: f64,
    pub reason: String,
}

/// Output of [`sweep`].
#[derive(Debug, Clone)]
pub struct ContinuationRun {
    pub axis: SweepAxis,
    pub anchor: AdjointAnchor,
    pub steps: Vec<StepRecord>,
    pub tracks: Vec<BranchTrack>,
    pub events: Vec<BifurcationEvent>,
    pub truncated: Option<Truncation>,
    /// Informational notes: restabilizations, fallback orientations, etc.
    pub diagnostics: Vec<String>,
}

impl ContinuationRun {
    pub fn events_of(&self, kind: EventKind) -> Vec<&BifurcationEvent> {
        self.events.iter().filter(|e| e.kind == kind).collect()
    }

    /// Parameter values at which a signature changed along a track without
    /// an event or anchored reorientation nearby.
    pub fn signature_flips(&self, guard: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for t in &self.tracks {
            let mut prev: Option<&TrackSample> = None;
            for s in &t.samples {
                if s.classification != Classification::IsolatedImaginary || s.frozen || s.signature.is_none() {
                    if s.classification != Classification::IsolatedImaginary {
                        prev = None;
                    }
                    continue;
                }
                if let Some(p) = prev {
                    if p.signature != s.signature && !s.anchored {
                        let near_event = self
                            .events
                            .iter()
                            .any(|e| e.param_at >= p.param.min(s.param) - guard && e.param_at <= p.param.max(s.param) + guard);
                        if !near_event {
                            out.push((t.branch_id, s.param));
                        }
                    }
                }
                prev = Some(s);
            }
        }
        out
    }
}

/// Upper-half-plane isolated eigenpair prepared for tracking.
#[derive(Debug, Clone)]
struct Observation {
    lambda: Complex64,
    classification: Classification,
    y: Cvec,
    z: Cvec,
    adjoint: Option<(Cvec, Cvec)>,
    phase_theta: Option<f64>,
    on_axis: bool,
    frozen: bool,
}

fn observations(snap: &SpectrumSnapshot, cfg: &SweepConfig) -> Vec<Observation> {
    let t = &snap.thresholds;
    let mu = snap.state.params().mu.abs();
    let band = snap.continuous_band_edges.map(|_| mu - t.band_margin * mu);
    let mut out = Vec::new();
    for p in &snap.pairs {
        if !p.is_isolated() || p.lambda.im <= t.tol_zero || p.lambda.norm() > cfg.tracking.track_max {
            continue;
        }
        let on_axis = p.classification == Classification::IsolatedImaginary;
        let frozen = band.is_some_and(|b| p.lambda.im.abs() > b);
        let (mut y, mut z, mut theta) = (p.y.clone(), p.z.clone(), None);
        let mut adjoint = p.adjoint.clone();
        let mut phase_ok = true;
        if on_axis {
            match pt_phase_fix(&p.y, &p.z, &cfg.phase) {
                Ok((y2, z2, th)) => {
                    y = y2;
                    z = z2;
                    theta = Some(th);
                }
                Err(_) => phase_ok = false,
            }
            adjoint = match adjoint {
                Some((ya, za)) => pt_phase_fix(&ya, &za, &cfg.phase).ok().map(|(a, b, _)| (a, b)),
                None => None,
            };
        }
        if !phase_ok {
            adjoint = None;
        }
        out.push(Observation {
            lambda: p.lambda,
            classification: p.classification,
            y,
            z,
            adjoint,
            phase_theta: theta,
            on_axis,
            frozen,
        });
    }
    out
}

/// Phase-insensitive distance between two unit vectors, using the PT gauge
/// when both are PT-normalized.
fn vector_distance(a: (&[Complex64], &[Complex64]), b: (&[Complex64], &[Complex64]), pt_fixed: bool, grid: &MappedGrid) -> f64 {
    let ov = overlap(a.0, a.1, b.0, b.1, grid);
    let na = grid.norm(&[a.0, a.1]);
    let nb = grid.norm(&[b.0, b.1]);
    let c = if pt_fixed { ov.re.abs() } else { ov.norm() };
    (na * na + nb * nb - 2.0 * c).max(0.0).sqrt()
}

/// Matches observations to live tracks. Returns `assign[obs] = Some(track)`.
fn match_tracks(tracks: &[BranchTrack], obs: &[Observation], opts: &TrackingOptions, grid: &MappedGrid) -> Vec<Option<usize>> {
    let mut cands: Vec<(f64, usize, usize)> = Vec::new();
    for (ti, t) in tracks.iter().enumerate() {
        if matches!(t.status, TrackStatus::Lost | TrackStatus::Merged) {
            continue;
        }
        let (Some(last), Some(vecs)) = (t.samples.last(), t.last.as_ref()) else { continue };
        for (oi, o) in obs.iter().enumerate() {
            let dl = (o.lambda - last.lambda).norm();
            if dl > opts.radius {
                continue;
            }
            let ov = overlap(&o.y, &o.z, &vecs.y, &vecs.z, grid).norm();
            let cost = dl + opts.proximity * (1.0 - ov.min(1.0));
            cands.push((cost, ti, oi));
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assign = vec![None; obs.len()];
    let mut used = vec![false; tracks.len()];
    for (_, ti, oi) in cands {
        if used[ti] || assign[oi].is_some() {
            continue;
        }
        used[ti] = true;
        assign[oi] = Some(ti);
    }
    assign
}

struct Tracker {
    tracks: Vec<BranchTrack>,
    /// Gap history of on-axis track pairs: (a, b) -> [(param, gap)].
    gaps: BTreeMap<(usize, usize), Vec<(f64, f64)>>,
    real_pairs: usize,
}

#[derive(Debug)]
enum StepFailure {
    Solver(Error),
    Ambiguous,
}

/// Runs a continuation.
pub fn sweep(cfg: &SweepConfig) -> Result<ContinuationRun> {
    cfg.validate()?;
    let params = cfg.nominal_params();
    let anchor = cfg.anchor();
    let first = cfg.problem_at(params[0])?;
    let state = seed_state(&cfg.branch, &first, &cfg.newton)?;
    let mut run = ContinuationRun {
        axis: cfg.axis,
        anchor,
        steps: Vec::new(),
        tracks: Vec::new(),
        events: Vec::new(),
        truncated: None,
        diagnostics: Vec::new(),
    };
    let mut tracker = Tracker { tracks: Vec::new(), gaps: BTreeMap::new(), real_pairs: 0 };
    let snap = solve_spectrum(&state, cfg.spectral)?;
    match advance(&mut tracker, &snap, params[0], cfg, anchor, true) {
        Ok(notes) => run.diagnostics.extend(notes),
        Err(StepFailure::Solver(e)) => return Err(e),
        Err(StepFailure::Ambiguous) => unreachable!("anchoring never continues signs"),
    }
    run.steps.push(step_record(&snap, params[0]));

    let mut history: Vec<StationaryState> = vec![state];
    let mut snaps: Vec<(f64, SpectrumSnapshot)> = vec![(params[0], snap)];
    let min_h = cfg.step / f64::powi(2.0, cfg.tracking.refine_depth as i32);
    let mut p = params[0];
    let mut k_target = 1;
    let mut h = cfg.step;
    let dir = cfg.direction();
    while k_target < params.len() {
        let target = params[k_target];
        let dist = (target - p).abs();
        let hh = h.min(dist);
        let p_new = if hh >= dist - 1e-12 * cfg.step { target } else { p + dir * hh };
        let attempt = try_step(&history, p_new, cfg).and_then(|st| {
            let snap = solve_spectrum(&st, cfg.spectral).map_err(StepFailure::Solver)?;
            Ok((st, snap))
        });
        let attempt = attempt.and_then(|(st, snap)| {
            let backup = (tracker.tracks.clone(), tracker.real_pairs);
            let force = hh <= min_h * 1.0001;
            match advance(&mut tracker, &snap, p_new, cfg, anchor, force) {
                Ok(notes) => Ok((st, snap, notes)),
                Err(e) => {
                    tracker.tracks = backup.0;
                    tracker.real_pairs = backup.1;
                    Err(e)
                }
            }
        });
        match attempt {
            Ok((st, snap, notes)) => {
                run.diagnostics.extend(notes);
                run.steps.push(step_record(&snap, p_new));
                let prev = snaps.last().expect("at least one snapshot").clone();
                detect_events(&mut tracker, &mut run, cfg, &prev, (p_new, &snap), &history);
                history.push(st);
                if history.len() > 3 {
                    history.remove(0);
                }
                snaps.push((p_new, snap));
                if snaps.len() > 3 {
                    snaps.remove(0);
                }
                p = p_new;
                if p_new == target {
                    k_target += 1;
                }
                h = (2.0 * hh).min(cfg.step);
            }
            Err(err) => {
                if hh > min_h * 1.0001 {
                    h = hh / 2.0;
                    continue;
                }
                let reason = match err {
                    StepFailure::Solver(e) => e.to_string(),
                    StepFailure::Ambiguous => "adjoint orientation ambiguous at minimum step".into(),
                };
                for t in tracker.tracks.iter_mut() {
                    if t.status == TrackStatus::Alive || t.status == TrackStatus::OffAxis {
                        t.status = TrackStatus::Lost;
                    }
                }
                run.truncated = Some(Truncation { param: p_new, reason });
                break;
            }
        }
    }
    run.tracks = tracker.tracks;
    run.events.sort_by(|a, b| (dir * a.param_at).total_cmp(&(dir * b.param_at)));
    Ok(run)
}

fn step_record(snap: &SpectrumSnapshot, param: f64) -> StepRecord {
    let pr = snap.state.params();
    StepRecord {
        param,
        mu: pr.mu,
        gamma: pr.gamma,
        power: snap.state.power,
        residual: snap.state.residual_inf,
        iterations: snap.state.iterations,
        unstable: snap.is_unstable(),
        max_re: snap.max_real_part(),
        spectrum: snap.pairs.iter().map(|p| (p.lambda, p.classification)).collect(),
    }
}

fn param_of(st: &StationaryState, axis: SweepAxis) -> f64 {
    match axis {
        SweepAxis::Gamma => st.params().gamma,
        SweepAxis::Mu => st.params().mu,
    }
}

/// Newton solve at `p` from a secant prediction through the last two states.
fn try_step(history: &[StationaryState], p: f64, cfg: &SweepConfig) -> std::result::Result<StationaryState, StepFailure> {
    let pr = cfg.problem_at(p).map_err(StepFailure::Solver)?;
    let guess = predict(history, p, cfg.axis);
    let mut st = newton_solve(&guess, &pr, &cfg.newton).map_err(StepFailure::Solver)?;
    st.branch_label = cfg.branch.clone();
    Ok(st)
}

fn predict(history: &[StationaryState], p: f64, axis: SweepAxis) -> Cvec {
    let cur = history.last().expect("history is never empty");
    if history.len() < 2 {
        return cur.phi.clone();
    }
    let prev = &history[history.len() - 2];
    let (p1, p0) = (param_of(cur, axis), param_of(prev, axis));
    if p1 == p0 {
        return cur.phi.clone();
    }
    let r = (p - p1) / (p1 - p0);
    cur.phi.iter().zip(&prev.phi).map(|(c, q)| c + r * (c - q)).collect()
}

/// Solves the state at `p` starting from the nearest known state.
fn state_near(history: &[StationaryState], p: f64, cfg: &SweepConfig) -> Result<StationaryState> {
    let pr = cfg.problem_at(p)?;
    let near = history
        .iter()
        .min_by(|a, b| (param_of(a, cfg.axis) - p).abs().total_cmp(&(param_of(b, cfg.axis) - p).abs()))
        .expect("history is never empty");
    newton_solve(&near.phi, &pr, &cfg.newton)
}

/// Applies one snapshot to the tracks.
fn advance(
    tracker: &mut Tracker,
    snap: &SpectrumSnapshot,
    param: f64,
    cfg: &SweepConfig,
    anchor: AdjointAnchor,
    force: bool,
) -> std::result::Result<Vec<String>, StepFailure> {
    let grid = snap.state.grid().clone();
    let obs = observations(snap, cfg);
    let assign = match_tracks(&tracker.tracks, &obs, &cfg.tracking, &grid);
    let mut notes = Vec::new();
    let mut matched = vec![false; tracker.tracks.len()];
    let mut new_tracks = Vec::new();
    for (oi, o) in obs.iter().enumerate() {
        let prev_vecs = assign[oi].and_then(|ti| tracker.tracks[ti].last.clone());
        let mut anchored = false;
        // PT normalization fixes each vector only up to a sign, so the
        // eigenvector is continued along the track as well as its adjoint.
        let mut o = o.clone();
        let mut lost_orientation = false;
        if let Some(pv) = prev_vecs.as_ref().filter(|v| v.on_axis && o.on_axis) {
            let s = match continue_adjoint_sign((&pv.y, &pv.z), (&o.y, &o.z), &grid) {
                Ok(s) => s,
                Err(_) if !force => return Err(StepFailure::Ambiguous),
                Err(_) => {
                    lost_orientation = true;
                    1
                }
            };
            if s < 0 {
                o.y.iter_mut().chain(o.z.iter_mut()).for_each(|v| *v = -*v);
            }
        }
        let o = &o;
        let sign = match (&o.adjoint, prev_vecs.as_ref().and_then(|v| v.adjoint.as_ref().filter(|_| v.on_axis))) {
            (Some((ya, za)), Some((pya, pza))) if o.on_axis && !lost_orientation => {
                match continue_adjoint_sign((pya, pza), (ya, za), &grid) {
                    Ok(s) => s,
                    Err(_) if !force => return Err(StepFailure::Ambiguous),
                    Err(_) => {
                        anchored = true;
                        notes.push(format!(
                            "{} = {param:.6e}: adjoint orientation of lambda = {:.6e}{:+.6e}i taken from the anchor rule",
                            cfg.axis.as_str(),
                            o.lambda.re,
                            o.lambda.im
                        ));
                        anchor.orient(&o.y, &o.z, ya, za, &grid)
                    }
                }
            }
            (Some((ya, za)), _) => {
                anchored = true;
                anchor.orient(&o.y, &o.z, ya, za, &grid)
            }
            (None, _) => 1,
        };
        let adjoint = o
            .adjoint
            .as_ref()
            .map(|(ya, za)| (ya.iter().map(|v| v * sign as f64).collect::<Cvec>(), za.iter().map(|v| v * sign as f64).collect::<Cvec>()));
        let krein = adjoint
            .as_ref()
            .and_then(|(ya, za)| krein_quantity(&o.y, &o.z, Some((ya, za)), &grid).ok());
        let sig = if o.on_axis { krein.and_then(|k| signature(k, cfg.tracking.krein_floor)) } else { None };
        let sample = TrackSample {
            param,
            lambda: o.lambda,
            classification: o.classification,
            krein,
            signature: sig,
            phase_theta: o.phase_theta,
            adjoint_sign: sign,
            frozen: o.frozen,
            anchored,
        };
        let vecs = TrackVectors { y: o.y.clone(), z: o.z.clone(), adjoint, on_axis: o.on_axis };
        let status = if o.on_axis { TrackStatus::Alive } else { TrackStatus::OffAxis };
        match assign[oi] {
            Some(ti) => {
                matched[ti] = true;
                let t = &mut tracker.tracks[ti];
                t.samples.push(sample);
                t.last = Some(vecs);
                t.status = status;
            }
            None => new_tracks.push(BranchTrack { branch_id: 0, samples: vec![sample], status, last: Some(vecs) }),
        }
    }
    for (ti, t) in tracker.tracks.iter_mut().enumerate() {
        if !matched[ti] && matches!(t.status, TrackStatus::Alive | TrackStatus::OffAxis) {
            t.status = TrackStatus::Lost;
            t.last = None;
        }
    }
    for mut t in new_tracks {
        t.branch_id = tracker.tracks.len();
        tracker.tracks.push(t);
    }
    tracker.real_pairs = count_real_pairs(snap);
    Ok(notes)
}

/// Number of nonzero eigenvalues on the positive real axis.
fn count_real_pairs(snap: &SpectrumSnapshot) -> usize {
    let t = &snap.thresholds;
    snap.pairs
        .iter()
        .filter(|p| {
            p.classification == Classification::ComplexQuadruplet
                && p.lambda.re > t.tol_re
                && p.lambda.im.abs() <= t.tol_zero.max(1e-9 * p.lambda.norm())
        })
        .count()
}

/// Looks for the members of a pair in a snapshot near predicted eigenvalues.
fn locate_pair(snap: &SpectrumSnapshot, pred_a: Complex64, pred_b: Complex64, cfg: &SweepConfig) -> Option<(Observation, Observation)> {
    let obs = observations(snap, cfg);
    if obs.len() < 2 {
        return None;
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..obs.len() {
        for j in 0..obs.len() {
            if i == j {
                continue;
            }
            let c = (obs[i].lambda - pred_a).norm() + (obs[j].lambda - pred_b).norm();
            if best.is_none_or(|b| c < b.0) {
                best = Some((c, i, j));
            }
        }
    }
    let (c, i, j) = best?;
    if c > 4.0 * cfg.tracking.radius {
        return None;
    }
    Some((obs[i].clone(), obs[j].clone()))
}

fn probe_pair(snap: &SpectrumSnapshot, param: f64, pred: (Complex64, Complex64), cfg: &SweepConfig) -> Result<PairProbe> {
    let grid = snap.state.grid().clone();
    let (a, b) = locate_pair(snap, pred.0, pred.1, cfg)
        .ok_or_else(|| Error::InvalidParameters(format!("pair not found near {:?}", pred)))?;
    let pt = a.phase_theta.is_some() && b.phase_theta.is_some();
    let d_vec = vector_distance((&a.y, &a.z), (&b.y, &b.z), pt, &grid);
    let d_adj = match (&a.adjoint, &b.adjoint) {
        (Some(x), Some(y)) => Some(vector_distance((&x.0, &x.1), (&y.0, &y.1), pt, &grid)),
        _ => None,
    };
    Ok(PairProbe {
        param,
        lambda_a: a.lambda,
        lambda_b: b.lambda,
        d_vec,
        d_adj,
        off_axis: !(a.on_axis && b.on_axis),
    })
}

fn lerp_lambda(samples: &[TrackSample], p: f64) -> Complex64 {
    let n = samples.len();
    if n < 2 {
        return samples[n - 1].lambda;
    }
    let (s0, s1) = (&samples[n - 2], &samples[n - 1]);
    if s1.param == s0.param {
        return s1.lambda;
    }
    let r = (p - s0.param) / (s1.param - s0.param);
    s0.lambda + (s1.lambda - s0.lambda) * r
}

fn sample_at(track: &BranchTrack, p: f64) -> Option<&TrackSample> {
    track.samples.iter().find(|s| s.param == p)
}

/// Examines the last accepted step for collisions.
fn detect_events(
    tracker: &mut Tracker,
    run: &mut ContinuationRun,
    cfg: &SweepConfig,
    prev: &(f64, SpectrumSnapshot),
    cur: (f64, &SpectrumSnapshot),
    history: &[StationaryState],
) {
    let (p0, p1) = (prev.0, cur.0);
    let opts = cfg.tracking;
    let axis = cfg.axis.as_str();

    // Pairs leaving or returning to the axis.
    let mut left: Vec<usize> = Vec::new();
    let mut returned: Vec<usize> = Vec::new();
    for t in &tracker.tracks {
        let (Some(a), Some(b)) = (sample_at(t, p0), sample_at(t, p1)) else { continue };
        let on0 = a.classification == Classification::IsolatedImaginary;
        let on1 = b.classification == Classification::IsolatedImaginary;
        if on0 && !on1 {
            left.push(t.branch_id);
        }
        if !on0 && on1 {
            returned.push(t.branch_id);
        }
    }
    // Off-axis tracks born at this step can be the partner of a departing one.
    let born_off: Vec<usize> = tracker
        .tracks
        .iter()
        .filter(|t| t.samples.len() == 1 && t.samples[0].param == p1 && t.samples[0].classification == Classification::ComplexQuadruplet)
        .map(|t| t.branch_id)
        .collect();
    let mut used = vec![false; tracker.tracks.len()];
    for &a in &left {
        if used[a] {
            continue;
        }
        used[a] = true;
        let la = sample_at(&tracker.tracks[a], p1).expect("sample exists").lambda;
        let partner = left
            .iter()
            .chain(born_off.iter())
            .copied()
            .filter(|&b| !used[b])
            .min_by(|&x, &y| {
                let lx = tracker.tracks[x].samples.last().expect("sample").lambda;
                let ly = tracker.tracks[y].samples.last().expect("sample").lambda;
                (lx + la.conj()).norm().total_cmp(&(ly + la.conj()).norm())
            });
        if let Some(b) = partner {
            used[b] = true;
        }
        let ev = instability_event(tracker, cfg, (a, partner), (p0, p1), history);
        run.events.push(ev);
    }
    for &a in &returned {
        let l = tracker.tracks[a].samples.last().expect("sample").lambda;
        run.diagnostics.push(format!(
            "{axis} in [{p0:.6e}, {p1:.6e}]: track {a} returned to the imaginary axis at lambda = {:.6e}i",
            l.im
        ));
    }

    // Zero collisions: an on-axis track disappears while a real pair appears.
    let real_now = tracker.real_pairs;
    let real_before = count_real_pairs(&prev.1);
    if real_now > real_before {
        let lost: Vec<usize> = tracker
            .tracks
            .iter()
            .filter(|t| {
                t.status == TrackStatus::Lost
                    && t.samples.last().is_some_and(|s| s.param == p0 && s.classification == Classification::IsolatedImaginary)
            })
            .map(|t| t.branch_id)
            .collect();
        let victim = lost.into_iter().min_by(|&x, &y| {
            let lx = tracker.tracks[x].samples.last().expect("sample").lambda.norm();
            let ly = tracker.tracks[y].samples.last().expect("sample").lambda.norm();
            lx.total_cmp(&ly)
        });
        if let Some(v) = victim {
            let ev = zero_collision_event(tracker, cfg, v, (p0, p1), history, real_before);
            tracker.tracks[v].status = TrackStatus::Merged;
            run.events.push(ev);
        }
    }

    // Close approaches on the axis: local minima of the gap.
    let alive: Vec<usize> = tracker
        .tracks
        .iter()
        .filter(|t| t.status == TrackStatus::Alive && t.samples.last().is_some_and(|s| s.param == p1))
        .map(|t| t.branch_id)
        .collect();
    for (i, &a) in alive.iter().enumerate() {
        for &b in &alive[i + 1..] {
            let la = tracker.tracks[a].samples.last().expect("sample");
            let lb = tracker.tracks[b].samples.last().expect("sample");
            if la.frozen || lb.frozen {
                continue;
            }
            let gap = (la.lambda - lb.lambda).norm();
            let entry = tracker.gaps.entry((a, b)).or_default();
            if entry.last().is_some_and(|e| e.0 != p0) {
                entry.clear();
            }
            entry.push((p1, gap));
            if entry.len() > 3 {
                entry.remove(0);
            }
        }
    }
    let mut approaches = Vec::new();
    for (&(a, b), g) in tracker.gaps.iter() {
        if g.len() == 3 && g[1].1 <= opts.proximity && g[1].1 <= g[0].1 && g[1].1 < g[2].1 && g[2].0 == p1 {
            approaches.push((a, b, g[0].0, g[2].0));
        }
    }
    tracker.gaps.retain(|_, g| g.last().is_some_and(|e| e.0 == p1));
    for (a, b, lo, hi) in approaches {
        let ev = approach_event(tracker, cfg, (a, b), (lo, hi), history, &prev.1, cur.1);
        if let Some(ev) = ev {
            run.events.push(ev);
        }
    }
}

fn pre_signature(tracker: &Tracker, id: Option<usize>, param: f64, guard: f64) -> Option<i8> {
    id.and_then(|i| tracker.tracks[i].signature_before(param, guard))
}

/// On-axis eigenvalue of a track at the last parameter before `p`.
fn last_on_axis(track: &BranchTrack, p: f64) -> Option<&TrackSample> {
    track
        .samples
        .iter()
        .rev()
        .find(|s| s.param != p && s.classification == Classification::IsolatedImaginary)
}

fn instability_event(
    tracker: &Tracker,
    cfg: &SweepConfig,
    ids: (usize, Option<usize>),
    (p0, p1): (f64, f64),
    history: &[StationaryState],
) -> BifurcationEvent {
    let opts = cfg.tracking;
    let ta = &tracker.tracks[ids.0];
    let before_a = last_on_axis(ta, p1).map(|s| s.lambda).unwrap_or(ta.samples[0].lambda);
    let before_b = ids
        .1
        .and_then(|b| last_on_axis(&tracker.tracks[b], p1).map(|s| s.lambda))
        .unwrap_or(before_a);
    let after_a = ta.samples.last().expect("sample").lambda;
    let centre = 0.5 * (before_a + before_b);
    let after_im = Complex64::new(0.0, after_a.im);

    let mut refine_probe = |p: f64| -> Result<PairProbe> {
        let st = state_near(history, p, cfg)?;
        let snap = solve_spectrum(&st, cfg.spectral)?;
        let r = (p - p0) / (p1 - p0);
        let pred_c = centre + (after_im - centre) * r;
        let spread = (before_a - before_b) * (1.0 - r);
        let pred_a = pred_c + 0.5 * spread;
        let pred_b = pred_c - 0.5 * spread;
        match probe_pair(&snap, p, (pred_a, pred_b), cfg) {
            Ok(pp) => Ok(pp),
            Err(_) => {
                // The pair may be a single off-axis eigenvalue and its mirror.
                let off = snap
                    .pairs
                    .iter()
                    .filter(|q| q.classification == Classification::ComplexQuadruplet && q.lambda.im > 0.0)
                    .min_by(|x, y| (x.lambda - pred_c).norm().total_cmp(&(y.lambda - pred_c).norm()));
                match off {
                    Some(q) => Ok(PairProbe {
                        param: p,
                        lambda_a: q.lambda,
                        lambda_b: -q.lambda.conj(),
                        d_vec: f64::NAN,
                        d_adj: None,
                        off_axis: true,
                    }),
                    None => Err(Error::InvalidParameters("pair not found".into())),
                }
            }
        }
    };
    let (bracket, probes) = match refine_transition(p0, p1, opts.refine_depth, &mut refine_probe) {
        Ok(v) => v,
        Err(_) => ((p0, p1), Vec::new()),
    };
    let evidence = detect_coalescence(&probes.iter().copied().filter(|p| p.d_vec.is_finite()).collect::<Vec<_>>(), &opts);

    // Post-split samples on a geometric grid beyond the bracket.
    let off_lambda = probes
        .iter()
        .filter(|p| p.off_axis)
        .min_by(|a, b| (a.param - bracket.1).abs().total_cmp(&(b.param - bracket.1).abs()))
        .map(|p| if p.lambda_a.re >= 0.0 { p.lambda_a } else { p.lambda_b })
        .unwrap_or(after_a);
    let dir = (p1 - p0).signum();
    let width = (p1 - p0).abs();
    let mut post = Vec::new();
    let mut target = off_lambda;
    for j in (0..opts.fit_samples).rev() {
        let p = bracket.1 + dir * width * 0.5f64.powi(j as i32);
        let Ok(st) = state_near(history, p, cfg) else { continue };
        let Ok(ev) = stability_eigenvalues(&st) else { continue };
        let near = ev
            .iter()
            .filter(|l| l.re > cfg.spectral.tol_re && l.im > 0.0)
            .min_by(|x, y| (*x - target).norm().total_cmp(&(*y - target).norm()));
        if let Some(&l) = near {
            post.push((p, l.re));
            target = l;
        }
    }
    let fit = fit_sqrt_splitting(&post, (bracket.0 - dir * width, bracket.1)).ok();
    let mid = 0.5 * (bracket.0 + bracket.1);
    let param_at = match fit {
        Some(f) if (f.param0 - mid).abs() <= width => f.param0,
        _ => mid,
    };
    let pre = (
        pre_signature(tracker, Some(ids.0), param_at, opts.delta_coal),
        pre_signature(tracker, ids.1, param_at, opts.delta_coal),
    );
    let theory_violation = matches!(pre, (Some(x), Some(y)) if x == y);
    let quadruplet_closed = state_near(history, p1, cfg).ok().and_then(|st| stability_eigenvalues(&st).ok()).map(|ev| {
        let l = after_a;
        let members = [l, -l, l.conj(), -l.conj()];
        set_distance(&members, &ev) <= 1e-6
    });
    BifurcationEvent {
        kind: EventKind::DefectiveInstability,
        param_at,
        bracket,
        lambda_at: Complex64::new(0.0, off_lambda.im),
        branch_ids: ids,
        pre_signatures: pre,
        evidence: Some(evidence),
        post_split: post,
        fit,
        theory_violation,
        quadruplet_closed,
    }
}

fn zero_collision_event(
    tracker: &Tracker,
    cfg: &SweepConfig,
    id: usize,
    (p0, p1): (f64, f64),
    history: &[StationaryState],
    real_before: usize,
) -> BifurcationEvent {
    let mut lo = p0;
    let mut hi = p1;
    for _ in 0..cfg.tracking.refine_depth {
        let mid = 0.5 * (lo + hi);
        let has_pair = state_near(history, mid, cfg)
            .and_then(|st| solve_spectrum(&st, cfg.spectral))
            .map(|s| count_real_pairs(&s) > real_before);
        match has_pair {
            Ok(true) => hi = mid,
            Ok(false) => lo = mid,
            Err(_) => break,
        }
    }
    let param_at = 0.5 * (lo + hi);
    let s = pre_signature(tracker, Some(id), param_at, cfg.tracking.delta_coal);
    BifurcationEvent {
        kind: EventKind::ZeroCollision,
        param_at,
        bracket: (lo, hi),
        lambda_at: Complex64::new(0.0, 0.0),
        branch_ids: (id, None),
        pre_signatures: (s, s),
        evidence: None,
        post_split: Vec::new(),
        fit: None,
        theory_violation: false,
        quadruplet_closed: None,
    }
}

fn approach_event(
    tracker: &Tracker,
    cfg: &SweepConfig,
    (a, b): (usize, usize),
    (lo, hi): (f64, f64),
    history: &[StationaryState],
    _prev: &SpectrumSnapshot,
    _cur: &SpectrumSnapshot,
) -> Option<BifurcationEvent> {
    let opts = cfg.tracking;
    let ta = &tracker.tracks[a];
    let tb = &tracker.tracks[b];
    let pts = |t: &BranchTrack| -> Vec<TrackSample> {
        t.samples.iter().filter(|s| s.param.min(lo.max(hi)) >= lo.min(hi) && s.param <= lo.max(hi)).cloned().collect()
    };
    let (sa, sb) = (pts(ta), pts(tb));
    if sa.len() < 2 || sb.len() < 2 {
        return None;
    }
    let interp = |s: &[TrackSample], p: f64| -> Complex64 {
        let k = s
            .windows(2)
            .position(|w| (p - w[0].param) * (p - w[1].param) <= 0.0)
            .unwrap_or(s.len() - 2);
        lerp_lambda(&s[k..k + 2], p)
    };
    let mut probe = |p: f64| -> Result<PairProbe> {
        let st = state_near(history, p, cfg)?;
        let snap = solve_spectrum(&st, cfg.spectral)?;
        probe_pair(&snap, p, (interp(&sa, p), interp(&sb, p)), cfg)
    };
    let evidence = refine_approach(lo, hi, &opts, &mut probe).ok()?;
    let closest = evidence
        .samples
        .iter()
        .min_by(|x, y| x.gap().total_cmp(&y.gap()))
        .copied()?;
    let any_off = evidence.samples.iter().any(|p| p.off_axis);
    let kind = match evidence.verdict {
        CoalescenceVerdict::Defective if !any_off => EventKind::DefectiveSafePassage,
        CoalescenceVerdict::Distinct if !any_off => EventKind::NearPass,
        _ => EventKind::Unresolved,
    };
    let param_at = closest.param;
    let pre = (
        pre_signature(tracker, Some(a), param_at, opts.delta_coal),
        pre_signature(tracker, Some(b), param_at, opts.delta_coal),
    );
    Some(BifurcationEvent {
        kind,
        param_at,
        bracket: (lo.min(hi), lo.max(hi)),
        lambda_at: 0.5 * (closest.lambda_a + closest.lambda_b),
        branch_ids: (a, Some(b)),
        pre_signatures: pre,
        evidence: Some(evidence),
        post_split: Vec::new(),
        fit: None,
        theory_violation: false,
        quadruplet_closed: None,
    })
}
