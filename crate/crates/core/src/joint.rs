//! Joint design of the sensing and communication beams as a second-order
//! cone program.
//!
//! Each SINR constraint `|a^H f|^2 / (interference + noise) >= gamma` is
//! non-convex as written. Because a common phase rotation of a beam changes
//! no SINR, the useful term can be taken real and nonnegative, and the square
//! root of the cross-multiplied constraint is a cone:
//!
//! ```text
//! user:   Re{h_u^H f_u} / sqrt(gamma_u)
//!            >= || h_u^H f_t, sqrt(eta) h_tu h_t^H f_t, sqrt(eta) h_tu h_t^H f_u,
//!                  sqrt(eta) |h_tu| sigma_t, sigma_u ||
//! tag:    Re{h_t^H f_t} / sqrt(gamma_t) >= || h_t^H f_u, sigma_t ||
//! reader: sqrt(eta / gamma_r) |w^H h_r| Re{h_t^H f_t}
//!            >= || sqrt(eta) (w^H h_r) h_t^H f_u, sqrt(eta) |w^H h_r| sigma_t, sigma_r ||
//! ```
//!
//! Complex quantities are split into real and imaginary rows over the
//! decision vector `[Re f_t; Im f_t; Re f_u; Im f_u]`, followed by the
//! epigraph scalars of the objective.

use crate::conic::{
    solve_conic, AffineRow, ConicProgram, ConicStatus, SecondOrderCone, SolverSettings,
};
use crate::error::{Error, Result};
use crate::scene::{CVector, ChannelSet, SystemParams, C64};
use crate::sinr::{evaluate, BeamPair, Combiner, SinrReport};

pub const USER_CONE: &str = "user_sinr";
pub const TAG_CONE: &str = "tag_sinr";
pub const READER_CONE: &str = "reader_sinr";
pub const POWER_CAP_CONE: &str = "power_cap";

/// Relative slack allowed on SINR thresholds and on the power budget when
/// accepting a solver point.
pub const ACCEPT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveMode {
    /// `||f_t|| + ||f_u||`.
    #[default]
    SumOfNorms,
    /// `||f_t||^2 + ||f_u||^2`, through the epigraph of `||[f_t; f_u]||`.
    TotalPower,
}

/// Rows computing `Re{h^H f}` and `Im{h^H f}` from `[Re f; Im f]`.
pub fn real_embed(h: &CVector) -> (Vec<f64>, Vec<f64>) {
    let re = h
        .iter()
        .map(|z| z.re)
        .chain(h.iter().map(|z| z.im))
        .collect();
    let im = h
        .iter()
        .map(|z| -z.im)
        .chain(h.iter().map(|z| z.re))
        .collect();
    (re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Beam {
    Sensing,
    Communication,
}

/// Row builder for the fixed variable layout.
struct Layout {
    n_tx: usize,
    n_vars: usize,
}

impl Layout {
    fn block(&self, beam: Beam) -> usize {
        match beam {
            Beam::Sensing => 0,
            Beam::Communication => 2 * self.n_tx,
        }
    }

    fn place(&self, beam: Beam, coeffs: Vec<f64>, scale: f64) -> AffineRow {
        let mut row = AffineRow::zeros(self.n_vars);
        let start = self.block(beam);
        for (dst, c) in row.coeffs[start..start + 2 * self.n_tx]
            .iter_mut()
            .zip(coeffs)
        {
            *dst = c * scale;
        }
        row
    }

    /// `Re` and `Im` rows of `c * h^H f_beam`.
    fn complex_term(&self, beam: Beam, h: &CVector, c: C64) -> [AffineRow; 2] {
        let (re, im) = real_embed(&(h * c.conj()));
        [self.place(beam, re, 1.0), self.place(beam, im, 1.0)]
    }

    fn real_part(&self, beam: Beam, h: &CVector, scale: f64) -> AffineRow {
        self.place(beam, real_embed(h).0, scale)
    }

    fn norm_rows(&self, beams: &[Beam]) -> Vec<AffineRow> {
        beams
            .iter()
            .flat_map(|&b| (0..2 * self.n_tx).map(move |k| self.block(b) + k))
            .map(|i| AffineRow::unit(self.n_vars, i))
            .collect()
    }
}

fn variable_names(n_tx: usize, mode: ObjectiveMode) -> Vec<String> {
    let mut names = Vec::with_capacity(4 * n_tx + 2);
    for prefix in ["re_ft", "im_ft", "re_fu", "im_fu"] {
        names.extend((0..n_tx).map(|i| format!("{prefix}[{i}]")));
    }
    match mode {
        ObjectiveMode::SumOfNorms => {
            names.extend(["t_sensing".to_string(), "t_communication".to_string()])
        }
        ObjectiveMode::TotalPower => names.push("t_total".to_string()),
    }
    names
}

/// Builds the joint program with the power budget enforced as a cone.
pub fn assemble_joint(
    channels: &ChannelSet,
    w: &Combiner,
    params: &SystemParams,
    mode: ObjectiveMode,
) -> Result<ConicProgram> {
    params.validate()?;
    let n_tx = channels.n_tx();
    if channels.h_u.len() != n_tx {
        return Err(Error::Dimension {
            expected: n_tx,
            found: channels.h_u.len(),
        });
    }
    if w.weights().len() != channels.h_r.len() {
        return Err(Error::Dimension {
            expected: channels.h_r.len(),
            found: w.weights().len(),
        });
    }
    let mut prog = ConicProgram::new(variable_names(n_tx, mode));
    let n_vars = prog.n_vars();
    let lay = Layout { n_tx, n_vars };
    let (h_t, h_u) = (&channels.h_t, &channels.h_u);
    let one = C64::new(1.0, 0.0);
    let sqrt_eta = params.eta.sqrt();
    let sigma_t = params.sigma2_tag.sqrt();

    let backscatter = channels.h_tu * sqrt_eta;
    let mut tail = Vec::with_capacity(8);
    tail.extend(lay.complex_term(Beam::Sensing, h_u, one));
    tail.extend(lay.complex_term(Beam::Sensing, h_t, backscatter));
    tail.extend(lay.complex_term(Beam::Communication, h_t, backscatter));
    tail.push(AffineRow::constant(n_vars, backscatter.norm() * sigma_t));
    tail.push(AffineRow::constant(n_vars, params.sigma2_user.sqrt()));
    let head = lay.real_part(Beam::Communication, h_u, (1.0 / params.gamma_user).sqrt());
    prog.cones.push(SecondOrderCone::new(USER_CONE, head, tail));

    let mut tail = Vec::with_capacity(3);
    tail.extend(lay.complex_term(Beam::Communication, h_t, one));
    tail.push(AffineRow::constant(n_vars, sigma_t));
    let head = lay.real_part(Beam::Sensing, h_t, (1.0 / params.gamma_tag).sqrt());
    prog.cones.push(SecondOrderCone::new(TAG_CONE, head, tail));

    let rx = w.response(&channels.h_r);
    let mut tail = Vec::with_capacity(4);
    tail.extend(lay.complex_term(Beam::Communication, h_t, rx * sqrt_eta));
    tail.push(AffineRow::constant(n_vars, sqrt_eta * rx.norm() * sigma_t));
    tail.push(AffineRow::constant(n_vars, params.sigma2_reader.sqrt()));
    let head = lay.real_part(
        Beam::Sensing,
        h_t,
        (params.eta / params.gamma_reader).sqrt() * rx.norm(),
    );
    prog.cones
        .push(SecondOrderCone::new(READER_CONE, head, tail));

    prog.cones.push(SecondOrderCone::new(
        POWER_CAP_CONE,
        AffineRow::constant(n_vars, params.total_power.sqrt()),
        lay.norm_rows(&[Beam::Sensing, Beam::Communication]),
    ));

    let epigraph = 4 * n_tx;
    match mode {
        ObjectiveMode::SumOfNorms => {
            prog.cones.push(SecondOrderCone::new(
                "sensing_norm",
                AffineRow::unit(n_vars, epigraph),
                lay.norm_rows(&[Beam::Sensing]),
            ));
            prog.cones.push(SecondOrderCone::new(
                "communication_norm",
                AffineRow::unit(n_vars, epigraph + 1),
                lay.norm_rows(&[Beam::Communication]),
            ));
            prog.objective[epigraph] = 1.0;
            prog.objective[epigraph + 1] = 1.0;
        }
        ObjectiveMode::TotalPower => {
            prog.cones.push(SecondOrderCone::new(
                "total_norm",
                AffineRow::unit(n_vars, epigraph),
                lay.norm_rows(&[Beam::Sensing, Beam::Communication]),
            ));
            prog.objective[epigraph] = 1.0;
        }
    }
    Ok(prog)
}

/// Reads the beams back out of a solution vector in the joint layout.
pub fn beams_from_solution(x: &[f64], n_tx: usize) -> BeamPair {
    let beam =
        |start: usize| CVector::from_fn(n_tx, |i, _| C64::new(x[start + i], x[start + n_tx + i]));
    BeamPair {
        sensing: beam(0),
        communication: beam(2 * n_tx),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSolution {
    pub status: JointStatus,
    /// Present iff `status` is `Optimal`.
    pub beams: Option<BeamPair>,
    /// `||f_t|| + ||f_u||`.
    pub objective: f64,
    /// `||f_t||^2 + ||f_u||^2`.
    pub power: f64,
    pub report: Option<SinrReport>,
    pub iterations: u32,
}

impl JointSolution {
    fn without_beams(status: JointStatus, iterations: u32) -> Self {
        Self {
            status,
            beams: None,
            objective: f64::NAN,
            power: f64::NAN,
            report: None,
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == JointStatus::Optimal
    }
}

/// Whether the power budget is a constraint of the program or only checked
/// afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerBudget {
    Constrained,
    /// Solve without the budget cone and report `Infeasible` if the optimum
    /// exceeds it.
    Checked,
}

fn solve_program(
    prog: &ConicProgram,
    channels: &ChannelSet,
    params: &SystemParams,
    budget: PowerBudget,
    settings: &SolverSettings,
) -> Result<JointSolution> {
    let raw = solve_conic(prog, settings)?;
    match raw.status {
        ConicStatus::Infeasible => {
            return Ok(JointSolution::without_beams(
                JointStatus::Infeasible,
                raw.iterations,
            ))
        }
        ConicStatus::NumericalFailure => {
            return Ok(JointSolution::without_beams(
                JointStatus::NumericalFailure,
                raw.iterations,
            ))
        }
        ConicStatus::Optimal => {}
    }
    let beams = beams_from_solution(&raw.x, channels.n_tx());
    let report = evaluate(channels, &beams, params)?;
    if report.worst_violation(params) > ACCEPT_SLACK {
        log::warn!(
            "solver point violates an SINR constraint by {:e} (relative)",
            report.worst_violation(params)
        );
        return Ok(JointSolution::without_beams(
            JointStatus::NumericalFailure,
            raw.iterations,
        ));
    }
    if report.power_tx > params.total_power * (1.0 + ACCEPT_SLACK) {
        let status = match budget {
            PowerBudget::Checked => JointStatus::Infeasible,
            PowerBudget::Constrained => JointStatus::NumericalFailure,
        };
        return Ok(JointSolution::without_beams(status, raw.iterations));
    }
    Ok(JointSolution {
        status: JointStatus::Optimal,
        objective: beams.sensing.norm() + beams.communication.norm(),
        power: report.power_tx,
        beams: Some(beams),
        report: Some(report),
        iterations: raw.iterations,
    })
}

/// Solves the joint design. Returned beams always pass the SINR audit
/// through [`crate::sinr::evaluate`]; a solver point that does not is
/// reported as `NumericalFailure`.
pub fn solve_joint(
    channels: &ChannelSet,
    w: &Combiner,
    params: &SystemParams,
    mode: ObjectiveMode,
    budget: PowerBudget,
    settings: &SolverSettings,
) -> Result<JointSolution> {
    let prog = assemble_joint(channels, w, params, mode)?;
    let prog = match budget {
        PowerBudget::Constrained => prog,
        PowerBudget::Checked => prog.without(POWER_CAP_CONE),
    };
    solve_program(&prog, channels, params, budget, settings)
}

/// Minimum-power joint design with the budget checked afterwards. This is the
/// feasibility oracle of the experiments.
pub fn min_power_joint(
    channels: &ChannelSet,
    params: &SystemParams,
    settings: &SolverSettings,
) -> Result<JointSolution> {
    let w = Combiner::matched(&channels.h_r)?;
    solve_joint(
        channels,
        &w,
        params,
        ObjectiveMode::TotalPower,
        PowerBudget::Checked,
        settings,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{ArrayConfig, LinkBudget, Position, Scene};
    use crate::zf::solve_zf;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cv(v: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&(re, im)| C64::new(re, im)))
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn layout_of(f: &CVector) -> Vec<f64> {
        f.iter()
            .map(|z| z.re)
            .chain(f.iter().map(|z| z.im))
            .collect()
    }

    fn reference_channels(n: usize, tag_bearing_deg: f64, tag_range: f64) -> ChannelSet {
        let array = ArrayConfig::half_wavelength(n).unwrap();
        let user = Position::new(5.0 * FRAC_1_SQRT_2, 5.0 * FRAC_1_SQRT_2);
        let tag = Position::from_bearing(tag_bearing_deg.to_radians(), tag_range);
        Scene::new(array, tag, user).unwrap().channels().unwrap()
    }

    #[test]
    fn real_embedding_small_cases() {
        let (re, im) = real_embed(&cv(&[(1.0, 0.0)]));
        let f = layout_of(&cv(&[(1.0, 0.0)]));
        assert_eq!((dot(&re, &f), dot(&im, &f)), (1.0, 0.0));

        let (re, im) = real_embed(&cv(&[(0.0, 1.0)]));
        assert_eq!((dot(&re, &f), dot(&im, &f)), (0.0, -1.0));
    }

    #[test]
    fn real_embedding_matches_complex_inner_product() {
        let h = cv(&[(0.3, -1.1), (2.5, 0.4), (-0.7, 0.9), (0.05, -0.6)]);
        let f = cv(&[(-1.2, 0.3), (0.8, 0.8), (0.1, -2.0), (1.7, 0.2)]);
        let (re, im) = real_embed(&h);
        let x = layout_of(&f);
        let z = h.dotc(&f);
        assert!((dot(&re, &x) - z.re).abs() < 1e-14);
        assert!((dot(&im, &x) - z.im).abs() < 1e-14);
    }

    #[test]
    fn cone_inventory() {
        let ch = reference_channels(4, 90.0, 6.0);
        let w = Combiner::matched(&ch.h_r).unwrap();
        let p = LinkBudget::default().params().unwrap();
        let prog = assemble_joint(&ch, &w, &p, ObjectiveMode::SumOfNorms).unwrap();
        assert_eq!(prog.cones.len(), 6);
        assert_eq!(prog.n_vars(), 4 * 4 + 2);
        assert_eq!(prog.cone(USER_CONE).unwrap().tail.len(), 8);
        assert_eq!(prog.cone(TAG_CONE).unwrap().tail.len(), 3);
        assert_eq!(prog.cone(READER_CONE).unwrap().tail.len(), 4);
        assert_eq!(prog.cone(POWER_CAP_CONE).unwrap().tail.len(), 16);
        prog.validate().unwrap();

        let prog = assemble_joint(&ch, &w, &p, ObjectiveMode::TotalPower).unwrap();
        assert_eq!(prog.cones.len(), 5);
        assert_eq!(prog.n_vars(), 17);
    }

    #[test]
    fn cone_residuals_follow_the_sinr_constraints() {
        // The ZF point, phase-rotated so the useful terms are real, is inside
        // every SINR cone; scaling its power down pushes it out of the tag cone.
        let ch = reference_channels(4, 70.0, 6.0);
        let w = Combiner::matched(&ch.h_r).unwrap();
        let p = LinkBudget::default().params().unwrap();
        let zf = solve_zf(&ch, &p).unwrap();
        assert!(zf.allocation.feasible);
        let mut beams = zf.beams();
        let rot_t = ch.h_t.dotc(&beams.sensing);
        let rot_u = ch.h_u.dotc(&beams.communication);
        beams.sensing *= C64::from_polar(1.0, -rot_t.arg());
        beams.communication *= C64::from_polar(1.0, -rot_u.arg());
        let prog = assemble_joint(&ch, &w, &p, ObjectiveMode::TotalPower).unwrap();
        let mut x = layout_of(&beams.sensing);
        x.extend(layout_of(&beams.communication));
        x.push(beams.total_power().sqrt());
        for label in [USER_CONE, TAG_CONE, READER_CONE] {
            let r = prog.cone(label).unwrap().residual(&x);
            assert!(
                r >= -1e-9 * prog.cone(label).unwrap().head.eval(&x).abs(),
                "{label}: {r}"
            );
        }
        let shrunk: Vec<f64> = x.iter().map(|v| v * 0.9).collect();
        assert!(prog.cone(TAG_CONE).unwrap().residual(&shrunk) < 0.0);
    }

    #[test]
    fn reader_cone_general_form_matches_matched_combiner_simplification() {
        let ch = reference_channels(4, 60.0, 5.0);
        let w = Combiner::matched(&ch.h_r).unwrap();
        let rx = w.response(&ch.h_r);
        assert!(rx.im.abs() < 1e-18 && (rx.re - ch.h_r.norm()).abs() < 1e-15);
        // a combiner with a global phase makes w^H h_r complex; the cone is unchanged
        let p = LinkBudget::default().params().unwrap();
        let a = assemble_joint(&ch, &w, &p, ObjectiveMode::TotalPower).unwrap();
        let w2 = w.rotated(1.3);
        assert!(w2.response(&ch.h_r).im.abs() > 0.5 * ch.h_r.norm());
        let b = assemble_joint(&ch, &w2, &p, ObjectiveMode::TotalPower).unwrap();
        let x: Vec<f64> = (0..a.n_vars())
            .map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.1)
            .collect();
        let (ra, rb) = (
            a.cone(READER_CONE).unwrap().residual(&x),
            b.cone(READER_CONE).unwrap().residual(&x),
        );
        assert!((ra - rb).abs() <= 1e-12 * ra.abs().max(1e-20), "{ra} {rb}");
    }

    #[test]
    fn single_user_limit_is_maximum_ratio_transmission() {
        let ch = reference_channels(4, 60.0, 3.0);
        let ch = ChannelSet {
            h_tu: C64::new(0.0, 0.0),
            ..ch
        };
        let p = SystemParams {
            gamma_tag: 1e-12,
            gamma_reader: 1e-12,
            gamma_user: 10.0,
            ..LinkBudget::default().params().unwrap()
        };
        let w = Combiner::matched(&ch.h_r).unwrap();
        let s = solve_joint(
            &ch,
            &w,
            &p,
            ObjectiveMode::TotalPower,
            PowerBudget::Constrained,
            &SolverSettings::default(),
        )
        .unwrap();
        assert!(s.is_optimal());
        let beams = s.beams.unwrap();
        let expected = p.gamma_user * p.sigma2_user / ch.h_u.norm_squared();
        assert!(
            (beams.communication_power() - expected).abs() <= 1e-3 * expected,
            "{} vs {expected}",
            beams.communication_power()
        );
        let align =
            ch.h_u.dotc(&beams.communication).norm() / (ch.h_u.norm() * beams.communication.norm());
        assert!(align > 1.0 - 1e-6);
        assert!(beams.sensing_power() <= 1e-3 * expected);
    }

    #[test]
    fn beyond_the_upper_bound_is_infeasible() {
        let ch = reference_channels(4, 60.0, 30.0);
        let p = LinkBudget::default().params().unwrap();
        let w = Combiner::matched(&ch.h_r).unwrap();
        let settings = SolverSettings::default();
        let capped = solve_joint(
            &ch,
            &w,
            &p,
            ObjectiveMode::SumOfNorms,
            PowerBudget::Constrained,
            &settings,
        )
        .unwrap();
        assert_eq!(capped.status, JointStatus::Infeasible);
        assert!(capped.beams.is_none());
        let checked = min_power_joint(&ch, &p, &settings).unwrap();
        assert_eq!(checked.status, JointStatus::Infeasible);
    }

    #[test]
    fn beam_pattern_scene_beats_zero_forcing() {
        let ch = reference_channels(8, 90.0, 6.0);
        let p = LinkBudget::default().params().unwrap();
        let w = Combiner::matched(&ch.h_r).unwrap();
        let zf = solve_zf(&ch, &p).unwrap();
        assert!(zf.allocation.feasible);
        let settings = SolverSettings::default();
        let s = solve_joint(
            &ch,
            &w,
            &p,
            ObjectiveMode::SumOfNorms,
            PowerBudget::Constrained,
            &settings,
        )
        .unwrap();
        assert!(s.is_optimal());
        assert!(s.report.unwrap().meets(&p, ACCEPT_SLACK));
        assert!(
            s.objective <= zf.sum_of_norms() * (1.0 + 1e-6),
            "{} vs {}",
            s.objective,
            zf.sum_of_norms()
        );
        let s = solve_joint(
            &ch,
            &w,
            &p,
            ObjectiveMode::TotalPower,
            PowerBudget::Constrained,
            &settings,
        )
        .unwrap();
        assert!(s.power <= zf.allocation.total() * (1.0 + 1e-6));
    }
}
