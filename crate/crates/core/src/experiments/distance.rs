use crate::scene::Position;

use super::{Execution, Experiment, MethodKind, Verdict};

/// Number of evenly spaced ranges probed before bisecting.
pub const PRESCAN_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSearch {
    pub low: f64,
    pub high: f64,
    /// Bisection stops once the bracket is narrower than this, in meters.
    pub tol: f64,
}

impl DistanceSearch {
    pub const DEFAULT_LOW: f64 = 0.1;
    pub const DEFAULT_TOL: f64 = 0.01;

    /// `[0.1 m, 2 * upper_bound]` with 1 cm tolerance.
    pub fn for_experiment(exp: &Experiment) -> Self {
        Self {
            low: Self::DEFAULT_LOW,
            high: 2.0 * exp.upper_bound.max(Self::DEFAULT_LOW),
            tol: Self::DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionStatus {
    Ok,
    /// Not feasible even at the low end of the bracket; distance reported as 0.
    InfeasibleAtContact,
    /// The pre-scan found a feasible range beyond an infeasible one. The
    /// distance is the largest feasible grid point, refined up to the next one.
    NonMonotone,
    /// Still feasible at the high end of the bracket.
    BracketExceeded,
    /// At least one solver failure during the search (treated as infeasible).
    SolverFailure,
}

impl DetectionStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectionStatus::Ok => "ok",
            DetectionStatus::InfeasibleAtContact => "infeasible_at_contact",
            DetectionStatus::NonMonotone => "non_monotone",
            DetectionStatus::BracketExceeded => "bracket_exceeded",
            DetectionStatus::SolverFailure => "solver_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome {
    pub distance: f64,
    pub status: DetectionStatus,
}

/// Largest feasible range under `feasible`, within `search.tol`.
///
/// Probes [`PRESCAN_POINTS`] evenly spaced ranges over the bracket, then
/// bisects between the last feasible probe and the one after it.
pub fn search_distance(
    search: &DistanceSearch,
    mut feasible: impl FnMut(f64) -> Verdict,
) -> SearchOutcome {
    let (mut failures, mut degenerate) = (0usize, 0usize);
    let mut out = bracket(search, |d| {
        let v = feasible(d);
        match v {
            Verdict::SolverFailure => failures += 1,
            Verdict::Degenerate => degenerate += 1,
            _ => {}
        }
        v.is_feasible()
    });
    if degenerate > 0 {
        log::warn!("{degenerate} degenerate scenes in one range search, counted as infeasible");
    }
    if failures > 0 && out.status == DetectionStatus::Ok {
        out.status = DetectionStatus::SolverFailure;
    }
    out
}

fn bracket(search: &DistanceSearch, mut probe: impl FnMut(f64) -> bool) -> SearchOutcome {
    let step = (search.high - search.low) / (PRESCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..PRESCAN_POINTS)
        .map(|i| search.low + i as f64 * step)
        .collect();
    let flags: Vec<bool> = grid.iter().map(|&d| probe(d)).collect();

    let Some(last) = flags.iter().rposition(|&f| f) else {
        return SearchOutcome {
            distance: 0.0,
            status: DetectionStatus::InfeasibleAtContact,
        };
    };
    let monotone = flags[..=last].iter().all(|&f| f);
    if last + 1 == grid.len() {
        return SearchOutcome {
            distance: search.high,
            status: DetectionStatus::BracketExceeded,
        };
    }
    let (mut lo, mut hi) = (grid[last], grid[last + 1]);
    while hi - lo > search.tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let status = if monotone {
        DetectionStatus::Ok
    } else {
        log::warn!("feasibility is not monotone in range; reporting {lo:.3} m");
        DetectionStatus::NonMonotone
    };
    SearchOutcome {
        distance: lo,
        status,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionPoint {
    pub method: MethodKind,
    pub n_antennas: usize,
    pub gamma_user_db: f64,
    pub bearing_deg: f64,
    pub distance: f64,
    pub status: DetectionStatus,
}

/// Achievable detection distance for a tag along `bearing_deg`.
pub fn detection_distance(
    exp: &Experiment,
    bearing_deg: f64,
    user: Position,
    method: MethodKind,
    search: &DistanceSearch,
) -> SearchOutcome {
    let bearing = bearing_deg.to_radians();
    search_distance(search, |d| {
        exp.feasible(Position::from_bearing(bearing, d), user, method)
    })
}

/// Detection distance on every bearing for each method, methods outermost.
pub fn detection_sweep(
    exp: &Experiment,
    bearings_deg: &[f64],
    user: Position,
    methods: &[MethodKind],
    search: &DistanceSearch,
    gamma_user_db: f64,
    execution: Execution,
) -> Vec<DetectionPoint> {
    let jobs: Vec<(MethodKind, f64)> = methods
        .iter()
        .flat_map(|&m| bearings_deg.iter().map(move |&b| (m, b)))
        .collect();
    execution.map(&jobs, |&(method, bearing_deg)| {
        let out = detection_distance(exp, bearing_deg, user, method, search);
        DetectionPoint {
            method,
            n_antennas: exp.array.n_tx,
            gamma_user_db,
            bearing_deg,
            distance: out.distance,
            status: out.status,
        }
    })
}
