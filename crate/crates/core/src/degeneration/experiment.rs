//! Families of catalog surfaces compared against a fixed limit candidate.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::graph::{graph_distance, Window};
use super::DegenerationError;
use crate::hyp3::{flat_catalog, fundamental_forms, gauss_lift, tube_surface, CatalogKind, GeodesicH3, LiftedPatch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Family {
    /// Equidistant surfaces about the vertical axis, compared with the tube
    /// around that axis.
    Equidistant { d: Vec<f64> },
    /// Horospheres `{z = c}`, compared with the last one in the sequence.
    TranslatedHorospheres { c: Vec<f64> },
}

impl Family {
    fn parameters(&self) -> &[f64] {
        match self {
            Family::Equidistant { d } => d,
            Family::TranslatedHorospheres { c } => c,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Equidistant { .. } => "equidistant",
            Family::TranslatedHorospheres { .. } => "translated_horospheres",
        }
    }

    fn validate(&self) -> Result<(), DegenerationError> {
        let p = self.parameters();
        if p.is_empty() || p.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(DegenerationError::BadParameter("family parameters"));
        }
        let up = p.windows(2).all(|w| w[0] <= w[1]);
        let down = p.windows(2).all(|w| w[0] >= w[1]);
        if !(up || down) {
            return Err(DegenerationError::BadParameter("family parameters must be monotone"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// A step with `C0` at most this, against a tube, is tube-like.
    pub tube_c0: f64,
    /// A step with `C0` at most this, against a surface lift, is
    /// surface-like.
    pub surface_c0: f64,
    /// Steps whose largest `‖II‖` exceeds this are never surface-like.
    pub max_second_form: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            tube_c0: 0.05,
            surface_c0: 1e-6,
            max_second_form: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    /// Parameter spacing of every sampled lift.
    pub h: f64,
    /// How far the limit candidate extends past the window on each side.
    pub margin: f64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self { h: 1.0 / 16.0, margin: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "Tube-like")]
    TubeLike,
    #[serde(rename = "Surface-like")]
    SurfaceLike,
    #[serde(rename = "Diverged")]
    Diverged,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::TubeLike => "Tube-like",
            Verdict::SurfaceLike => "Surface-like",
            Verdict::Diverged => "Diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub parameter: f64,
    pub c0: f64,
    pub c1: f64,
    pub max_second_form: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub family: String,
    pub window: Window,
    pub thresholds: Thresholds,
    pub steps: Vec<StepRecord>,
}

impl ConvergenceReport {
    pub fn final_verdict(&self) -> Option<Verdict> {
        self.steps.last().map(|s| s.verdict)
    }

    /// `C0` strictly decreasing from step to step.
    pub fn strictly_decreasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].c0 < w[0].c0)
    }
}

/// Verdict rule. Against a tube: tube-like when `C0 ≤ tube_c0`, otherwise
/// surface-like while `‖II‖` stays bounded. Against a surface lift:
/// surface-like when `C0 ≤ surface_c0` and `‖II‖` stays bounded. Everything
/// else is diverged.
pub fn verdict(tube_candidate: bool, c0: f64, max_ii: f64, t: &Thresholds) -> Verdict {
    let bounded = max_ii <= t.max_second_form;
    if tube_candidate {
        if c0 <= t.tube_c0 {
            Verdict::TubeLike
        } else if bounded {
            Verdict::SurfaceLike
        } else {
            Verdict::Diverged
        }
    } else if c0 <= t.surface_c0 && bounded {
        Verdict::SurfaceLike
    } else {
        Verdict::Diverged
    }
}

pub fn degeneration_experiment(
    family: &Family,
    window: &Window,
    thresholds: &Thresholds,
    options: &ExperimentOptions,
) -> Result<ConvergenceReport, DegenerationError> {
    family.validate()?;
    window.validate()?;
    if !(options.h > 0.0 && options.margin >= 0.0) {
        return Err(DegenerationError::BadParameter("experiment options"));
    }
    let grid = window.grid(options.h)?;
    let wide = window.expanded(options.margin).grid(options.h)?;
    let (candidate, tube): (LiftedPatch, bool) = match family {
        Family::Equidistant { .. } => (
            tube_surface(GeodesicH3::Vertical { x0: 0.0, y0: 0.0 }, wide)?.lifted(),
            true,
        ),
        Family::TranslatedHorospheres { c } => {
            let last = *c.last().expect("validated non-empty");
            let patch = flat_catalog(CatalogKind::Horosphere { c: last }, wide)?;
            (gauss_lift(&patch)?.lifted(), false)
        }
    };
    let mut steps = Vec::with_capacity(family.parameters().len());
    for (step, &v) in family.parameters().iter().enumerate() {
        let kind = match family {
            Family::Equidistant { .. } => CatalogKind::Equidistant { d: v },
            Family::TranslatedHorospheres { .. } => CatalogKind::Horosphere { c: v },
        };
        let patch = flat_catalog(kind, grid)?;
        let max_ii = fundamental_forms(&patch)?.max_second_norm();
        let lift = gauss_lift(&patch)?.lifted();
        let g = graph_distance(&lift, &candidate, window)?;
        steps.push(StepRecord {
            step,
            parameter: v,
            c0: g.c0,
            c1: g.c1,
            max_second_form: max_ii,
            verdict: verdict(tube, g.c0, max_ii, thresholds),
        });
    }
    Ok(ConvergenceReport {
        family: family.name().into(),
        window: *window,
        thresholds: *thresholds,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn window() -> Window {
        Window::new(-1.0, 1.0, -1.0, 1.0).unwrap()
    }

    #[test]
    fn equidistant_family_degenerates_to_tube() {
        let fam = Family::Equidistant { d: vec![0.5, 0.1, 0.02] };
        let r = degeneration_experiment(&fam, &window(), &Thresholds::default(), &ExperimentOptions::default()).unwrap();
        assert!(r.strictly_decreasing());
        assert!(r.steps[2].c0 <= 0.05);
        assert_eq!(r.final_verdict(), Some(Verdict::TubeLike));
        assert_eq!(r.steps[0].verdict, Verdict::SurfaceLike);
        // curvature of the equidistant surfaces blows up as they collapse
        assert!(r.steps[2].max_second_form > r.steps[0].max_second_form);
    }

    #[test]
    fn constant_horospheres_stay_put() {
        let fam = Family::TranslatedHorospheres { c: vec![1.0, 1.0, 1.0] };
        let r = degeneration_experiment(&fam, &window(), &Thresholds::default(), &ExperimentOptions::default()).unwrap();
        for s in &r.steps {
            assert_eq!(s.c0, 0.0);
            assert_eq!(s.verdict, Verdict::SurfaceLike);
        }
    }

    #[test]
    fn window_growth_keeps_distance() {
        let fam = Family::Equidistant { d: vec![0.3] };
        let opts = ExperimentOptions::default();
        let small = degeneration_experiment(&fam, &window(), &Thresholds::default(), &opts).unwrap();
        let big = Window::new(-1.5, 1.5, -1.5, 1.5).unwrap();
        let large = degeneration_experiment(&fam, &big, &Thresholds::default(), &opts).unwrap();
        let (a, b) = (small.steps[0].c0, large.steps[0].c0);
        assert!((a - b).abs() <= 0.1 * a);
    }

    #[test]
    fn rejects_non_monotone_sequences() {
        let fam = Family::Equidistant { d: vec![0.5, 0.1, 0.3] };
        let err = degeneration_experiment(&fam, &window(), &Thresholds::default(), &ExperimentOptions::default());
        assert!(matches!(err, Err(DegenerationError::BadParameter(_))));
    }
}
