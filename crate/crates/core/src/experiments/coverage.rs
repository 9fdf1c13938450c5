use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scene::Position;

use super::distance::{detection_distance, DistanceSearch};
use super::{default_bearings, Execution, Experiment, MethodKind};

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSpec {
    pub n_users: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Seed of the ChaCha8 stream the user positions are drawn from.
    pub seed: u64,
    pub bearings_deg: Vec<f64>,
}

impl Default for CoverageSpec {
    /// 400 users uniform over `[0, 20] x [-20, 20]` m, tag bearings every 5
    /// degrees.
    fn default() -> Self {
        Self {
            n_users: 400,
            x_range: (0.0, 20.0),
            y_range: (-20.0, 20.0),
            seed: 2024,
            bearings_deg: default_bearings(),
        }
    }
}

impl CoverageSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::InvalidParameter {
                name: "coverage",
                reason,
            })
        };
        if self.n_users == 0 {
            return bad("need at least one user".into());
        }
        if self.bearings_deg.is_empty() {
            return bad("need at least one tag bearing".into());
        }
        for (lo, hi) in [self.x_range, self.y_range] {
            if !(lo < hi) {
                return bad(format!("empty sampling range {lo}..{hi}"));
            }
        }
        Ok(())
    }

    /// User positions, x then y per user, in draw order.
    pub fn users(&self) -> Vec<Position> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.n_users)
            .map(|_| {
                let x = rng.random_range(self.x_range.0..self.x_range.1);
                let y = rng.random_range(self.y_range.0..self.y_range.1);
                Position::new(x, y)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveragePoint {
    pub user: Position,
    /// Mean over tag bearings of detection distance over the no-user range.
    pub ratio: f64,
}

/// Coverage ratio of every sampled user, sorted ascending (the support of the
/// empirical CDF).
pub fn coverage_cdf(
    exp: &Experiment,
    spec: &CoverageSpec,
    method: MethodKind,
    search: &DistanceSearch,
    execution: Execution,
) -> Result<Vec<CoveragePoint>> {
    spec.validate()?;
    if exp.upper_bound <= 0.0 {
        return Err(Error::Domain(
            "the tag cannot be read at any range; coverage is undefined".into(),
        ));
    }
    let users = spec.users();
    let mut points = execution.map(&users, |&user| {
        let total: f64 = spec
            .bearings_deg
            .iter()
            .map(|&b| {
                let d = detection_distance(exp, b, user, method, search).distance;
                (d / exp.upper_bound).clamp(0.0, 1.0)
            })
            .sum();
        CoveragePoint {
            user,
            ratio: total / spec.bearings_deg.len() as f64,
        }
    });
    points.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{ArrayConfig, LinkBudget};

    #[test]
    fn sampling_is_seeded_and_in_range() {
        let spec = CoverageSpec::default();
        let a = spec.users();
        assert_eq!(a, spec.users());
        assert_eq!(a.len(), 400);
        assert!(a
            .iter()
            .all(|p| (0.0..20.0).contains(&p.x) && (-20.0..20.0).contains(&p.y)));
        let other = CoverageSpec {
            seed: 7,
            ..spec.clone()
        }
        .users();
        assert_ne!(a, other);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(CoverageSpec {
            n_users: 0,
            ..CoverageSpec::default()
        }
        .validate()
        .is_err());
        assert!(CoverageSpec {
            x_range: (1.0, 1.0),
            ..CoverageSpec::default()
        }
        .validate()
        .is_err());
        assert!(CoverageSpec {
            bearings_deg: vec![],
            ..CoverageSpec::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn far_corner_user_barely_matters() {
        let exp = Experiment::new(
            ArrayConfig::half_wavelength(4).unwrap(),
            LinkBudget::default().params().unwrap(),
        )
        .unwrap();
        let search = DistanceSearch::for_experiment(&exp);
        let user = Position::new(20.0, -20.0);
        // tag bearings well away from the user's ~45 degrees
        let bearings: Vec<f64> = (18..=36).map(|i| i as f64 * 5.0).collect();
        for method in MethodKind::ALL {
            let mean = bearings
                .iter()
                .map(|&b| {
                    detection_distance(&exp, b, user, method, &search).distance / exp.upper_bound
                })
                .sum::<f64>()
                / bearings.len() as f64;
            assert!(mean >= 0.95, "{method}: {mean}");
        }
    }
}
