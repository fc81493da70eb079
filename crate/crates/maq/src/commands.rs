use std::path::Path;

use maq_core::convergence::RefinementStudy;
use maq_core::degeneration::{
    degeneration_experiment, DegenerationError, ExperimentOptions, Family, Verdict,
};
use maq_core::hyp3::{flat_catalog, fundamental_forms, tube_surface, GeometryError, Isometry, SurfacePatch};
use maq_core::ma_linear::{
    bilipschitz_ratio, build_structures, calibration_residual, classify_graph_plane, classify_line,
    graph_form_values, tau_invariant, LineClass, Mat2, Plane4, StructurePack,
};
use maq_core::ma_pde::{
    boundary_bernstein_check, counterexample_det_hessian, counterexample_family, counterexample_potential,
    gradient_fd, hessian_fd, immersion_tangent_defect, jholo_residual, ma_residual, newton_ma_solve,
    positivity_field, PdeError, Positivity,
};
use maq_core::quaternion::{
    classify_structure, left_complex, right_complex, spin_action, LinOp4, Quaternion, StructureClass,
};
use maq_core::{Grid2D, ScalarField2D};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;

use crate::config::{self, ExperimentConfig, NamedField};
use crate::formats;
use crate::report::{Check, SuiteReport};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    AlgebraVerify,
    PlaneClassify,
    MaCheck,
    Counterexample,
    Flat,
    Tube,
    Degenerate,
    Solve,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::AlgebraVerify => "algebra-verify",
            Command::PlaneClassify => "plane-classify",
            Command::MaCheck => "ma-check",
            Command::Counterexample => "counterexample",
            Command::Flat => "flat",
            Command::Tube => "tube",
            Command::Degenerate => "degenerate",
            Command::Solve => "solve",
        }
    }
}

/// Runs `command`, writes its artifacts and `report.json` into `out`, and
/// returns the report.
pub fn run_command(command: Command, cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<SuiteReport, CliError> {
    if let Some(name) = &cfg.command {
        if name != command.as_str() {
            return Err(CliError::config(format!(
                "configuration is for `{name}` but `{}` was requested",
                command.as_str()
            )));
        }
    }
    let mut ctx = Context {
        report: SuiteReport::new(command.as_str(), seed),
        rng: StdRng::seed_from_u64(seed),
        out,
    };
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match command {
        Command::AlgebraVerify => algebra_verify(cfg, &mut ctx)?,
        Command::PlaneClassify => plane_classify(cfg, &mut ctx)?,
        Command::MaCheck => ma_check(cfg, &mut ctx)?,
        Command::Counterexample => counterexample(cfg, &mut ctx)?,
        Command::Flat => flat(cfg, &mut ctx)?,
        Command::Tube => tube(cfg, &mut ctx)?,
        Command::Degenerate => degenerate(cfg, &mut ctx)?,
        Command::Solve => solve(cfg, &mut ctx)?,
    }
    ctx.report.artifacts.sort();
    ctx.report.write(&out.join("report.json"))?;
    Ok(ctx.report)
}

struct Context<'a> {
    report: SuiteReport,
    rng: StdRng,
    out: &'a Path,
}

impl Context<'_> {
    fn artifact(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<(), String>) -> Result<(), CliError> {
        formats::write_file(&self.out.join(name), f)?;
        self.report.artifacts.push(name.to_string());
        Ok(())
    }

    fn field_csv(&mut self, name: &str, field: &ScalarField2D) -> Result<(), CliError> {
        self.artifact(name, |buf| formats::write_field(field, buf))
    }
}

fn geometry_error(e: GeometryError) -> CliError {
    match e {
        GeometryError::BadParameter(_) | GeometryError::OutsideModel => CliError::config(e),
        _ => CliError::runtime(e),
    }
}

fn pde_error(e: PdeError) -> CliError {
    match e {
        PdeError::GridTooSmall { .. } | PdeError::BadSpacing | PdeError::DomainViolation => CliError::config(e),
        _ => CliError::runtime(e),
    }
}

fn orders_of(errors: &[f64]) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| maq_core::convergence::observed_order(w[0], w[1], 2.0))
        .collect()
}

fn algebra_verify(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<(), CliError> {
    let c = &cfg.algebra;
    let rng = &mut ctx.rng;
    let mut norm_defect = 0.0f64;
    for _ in 0..c.pairs {
        let x = Quaternion::random_box(rng, 10.0);
        let y = Quaternion::random_box(rng, 10.0);
        let rhs = x.norm() * y.norm();
        if rhs > 0.0 {
            norm_defect = norm_defect.max(((x * y).norm() - rhs).abs() / rhs);
        }
    }

    let one = Quaternion::ONE;
    let mut pairs = vec![(one, one), (-one, -one), (one, -one), (-one, one)];
    for _ in 0..c.pairs / 5 {
        let q = Quaternion::random_unit(rng);
        let r = Quaternion::random_unit(rng);
        pairs.extend([(q, q), (q, -q), (q, r)]);
    }
    let id = LinOp4::identity();
    let (mut hits, mut bad_kernel) = (0usize, 0usize);
    let mut orthogonality = 0.0f64;
    for (x, y) in pairs {
        let h = spin_action(x, y).map_err(CliError::runtime)?;
        orthogonality = orthogonality.max(h.orthogonality_defect()).max((h.det() - 1.0).abs());
        if h.approx_eq(&id, c.kernel) {
            hits += 1;
            let plus = x.max_abs_diff(one).max(y.max_abs_diff(one));
            let minus = x.max_abs_diff(-one).max(y.max_abs_diff(-one));
            if plus.min(minus) > c.kernel {
                bad_kernel += 1;
            }
        }
    }

    let mut misclassified = 0usize;
    for _ in 0..c.pairs / 10 {
        let x = Quaternion::random_unit_imaginary(rng);
        let z = Quaternion::random_unit(rng);
        let close = |a: Quaternion, b: Quaternion| a.max_abs_diff(b) <= c.kernel;
        let l = classify_structure(&left_complex(x).map_err(CliError::runtime)?);
        let r = classify_structure(&right_complex(x).map_err(CliError::runtime)?);
        let a = classify_structure(&spin_action(z, z).map_err(CliError::runtime)?);
        let ok = matches!(l, StructureClass::LeftComplex(q) if close(q, x))
            && matches!(r, StructureClass::RightComplex(q) if close(q, x))
            && matches!(a, StructureClass::Automorphism(q) if close(q, z.canonical_sign()));
        misclassified += usize::from(!ok);
    }

    let ijk = [Quaternion::I, Quaternion::J, Quaternion::K];
    let mut calibration = 0.0f64;
    for _ in 0..c.planes {
        let p = Plane4::random(rng);
        calibration = calibration.max(calibration_residual(&p, &ijk).map_err(CliError::runtime)?);
    }
    for _ in 0..c.frames {
        let q = Quaternion::random_unit(rng);
        let triple = ijk.map(|e| q * e * q.conj());
        for _ in 0..10 {
            let p = Plane4::random(rng);
            calibration = calibration.max(calibration_residual(&p, &triple).map_err(CliError::runtime)?);
        }
    }

    let pack = build_structures();
    let mut disagreements = 0usize;
    for n in 0..c.matrices {
        let mut a = Mat2::random(rng, 2.0);
        match n % 4 {
            1 if a.det() > 0.1 => a = a.scale(1.0 / a.det().sqrt()),
            2 => a.m[1][1] = -a.m[0][0],
            3 => a.m[1][0] = a.m[0][1],
            _ => {}
        }
        let direct = graph_form_values(&pack, &a).map(|v| v.abs() <= c.lexicon);
        let predicates = [
            (a.det() - 1.0).abs() <= c.lexicon,
            a.trace().abs() <= c.lexicon,
            (a.m[0][1] - a.m[1][0]).abs() <= c.lexicon,
        ];
        let agree = classify_graph_plane(&pack, &a)
            .map(|f| [f.omega_i, f.omega_j, f.omega_k] == direct && direct == predicates)
            .unwrap_or(false);
        disagreements += usize::from(!agree);
    }

    let rep = &mut ctx.report;
    rep.push(Check::at_most("norm_multiplicativity", norm_defect, c.norm_rel));
    rep.push(Check::equal("spin_kernel_size", hits as f64, 2.0));
    rep.push(Check::equal("spin_kernel_outside_pm_one", bad_kernel as f64, 0.0));
    rep.push(Check::at_most("spin_orthogonality", orthogonality, 1e-12));
    rep.push(Check::equal("structure_misclassified", misclassified as f64, 0.0));
    rep.push(Check::at_most("calibration_residual", calibration, c.calibration));
    rep.push(Check::equal("lexicon_disagreements", disagreements as f64, 0.0));
    Ok(())
}

fn line_summary(pack: &StructurePack, p: &Plane4) -> serde_json::Value {
    match classify_line(pack, p) {
        Ok(class) => json!({
            "class": format!("{class:?}"),
            "tau": tau_invariant(pack, p).ok(),
        }),
        Err(e) => json!({ "class": null, "reason": e.to_string() }),
    }
}

fn plane_classify(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<(), CliError> {
    let c = &cfg.plane;
    if c.a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CliError::config("plane.a must be finite"));
    }
    let a = Mat2::new(c.a[0][0], c.a[0][1], c.a[1][0], c.a[1][1]);
    let pack = build_structures();
    let flags = classify_graph_plane(&pack, &a).map_err(CliError::runtime)?;
    let values = graph_form_values(&pack, &a);
    let lib = [flags.omega_i, flags.omega_j, flags.omega_k];
    let direct = values.map(|v| v.abs() <= maq_core::tol::STRUCTURE);
    let plane = Plane4::graph(a);

    let rep = &mut ctx.report;
    rep.value("flags", flags);
    rep.value("form_values", values);
    rep.value("det", a.det());
    rep.value("trace", a.trace());
    rep.value("line", line_summary(&pack, &plane));
    rep.value("bilipschitz", bilipschitz_ratio(&pack, &plane).ok());
    let mismatches = lib.iter().zip(&direct).filter(|(x, y)| x != y).count();
    rep.push(Check::equal("flags_agree_with_forms", mismatches as f64, 0.0));
    if let Some(e) = c.expect {
        rep.push(Check::holds("flags_match_expected", lib == [e.omega_i, e.omega_j, e.omega_k]));
    }
    Ok(())
}

/// Samples interior nodes and compares the Hessian sign pattern with the
/// class of the complex line through the rescaled Hessian graph.
fn positivity_disagreements(u: &ScalarField2D, samples: usize, rng: &mut StdRng) -> Result<(usize, [usize; 4]), CliError> {
    let pack = build_structures();
    let classes = positivity_field(u).map_err(pde_error)?;
    let hess = hessian_fd(u).map_err(pde_error)?;
    let g = u.grid;
    let mut seen = [0usize; 4];
    let mut bad = 0usize;
    for _ in 0..samples {
        let i = rng.gen_range(1..g.nx - 1);
        let j = rng.gen_range(1..g.ny - 1);
        let Some(class) = classes.get(i, j) else { continue };
        let (a, b, c) = hess.at(i, j);
        let det = a * c - b * b;
        let m = Mat2::new(a, b, b, c);
        let m = if det > 0.0 { m.scale(1.0 / det.sqrt()) } else { m };
        let line = classify_line(&pack, &Plane4::graph(m)).ok();
        let agree = matches!(
            (class, line),
            (Positivity::Positive, Some(LineClass::Positive))
                | (Positivity::Negative, Some(LineClass::Negative))
                | (Positivity::Indefinite | Positivity::Null, None)
        );
        seen[class as usize] += 1;
        bad += usize::from(!agree);
    }
    Ok((bad, seen))
}

fn ma_check(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<(), CliError> {
    let c = &cfg.field;
    let (u, source) = match &c.csv {
        Some(path) => (formats::read_field_file(path)?, "csv".to_string()),
        None => {
            let g = c.grid.grid()?;
            c.name.check_domain(&g)?;
            let name = c.name;
            (ScalarField2D::from_fn(g, move |x, y| name.eval(x, y)), format!("{:?}", c.name))
        }
    };
    config::positive("field.residual_tol", c.residual_tol)?;
    let residual = ma_residual(&u).map_err(pde_error)?;
    let (d1, d2) = jholo_residual(&gradient_fd(&u).map_err(pde_error)?).map_err(pde_error)?;
    let (bad, seen) = positivity_disagreements(&u, c.samples, &mut ctx.rng)?;

    ctx.report.value("source", source);
    ctx.report.value("grid", u.grid);
    ctx.report.value("positivity_counts", json!({
        "positive": seen[Positivity::Positive as usize],
        "null": seen[Positivity::Null as usize],
        "negative": seen[Positivity::Negative as usize],
        "indefinite": seen[Positivity::Indefinite as usize],
    }));
    ctx.report.value("jholo_residual", [d1.max_abs(), d2.max_abs()]);
    ctx.report.push(Check::at_most("ma_residual", residual.max_abs(), c.residual_tol));
    ctx.report.push(Check::equal("positivity_disagreements", bad as f64, 0.0));
    ctx.field_csv("field.csv", &u)?;
    ctx.field_csv("residual.csv", &residual)?;
    Ok(())
}

fn counterexample(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<(), CliError> {
    let c = &cfg.counterexample;
    let y0 = config::positive("counterexample.y0", c.y0)?;
    let [x_min, x_max] = config::range("counterexample.x_range", c.x_range)?;
    let y_max = y0 + config::positive("counterexample.height", c.height)?;
    let h = config::positive("counterexample.h", c.h)?;
    if c.levels < 2 {
        return Err(CliError::config("counterexample.levels must be at least 2"));
    }
    let coarse = Grid2D::covering(x_min, x_max, y0, y_max, h).map_err(pde_error)?;

    let spot = counterexample_potential(2.0, 1.0);
    let mut det_defect = 0.0f64;
    for _ in 0..c.samples {
        let x = ctx.rng.gen_range(x_min..x_max);
        let y = ctx.rng.gen_range(y0..y_max);
        det_defect = det_defect.max((counterexample_det_hessian(x, y) - 1.0).abs());
    }
    let family = counterexample_family(coarse).map_err(pde_error)?;
    let tangent = immersion_tangent_defect(&build_structures(), &family, coarse);
    let convex = positivity_field(&family.potential).map_err(pde_error)?.all(Positivity::Positive);
    let bernstein = boundary_bernstein_check(&family.potential).map_err(pde_error)?;

    let (mut hs, mut errs) = (vec![], vec![]);
    let mut g = coarse;
    for _ in 0..c.levels {
        let u = ScalarField2D::from_fn(g, counterexample_potential);
        let r = ma_residual(&u).map_err(pde_error)?;
        hs.push(g.h);
        errs.push(r.max_error_on_common_nodes(&coarse, |_, _| 0.0));
        g = g.refined();
    }
    let study = RefinementStudy::new(hs, errs);

    let rep = &mut ctx.report;
    rep.value("phi_2_1", spot);
    rep.value("boundary", &bernstein);
    rep.value("fd_residuals", &study.errors);
    rep.value("fd_orders", &study.orders);
    rep.push(Check::equal("phi_2_1", spot, 49.0 / 12.0));
    rep.push(Check::at_most("analytic_det_defect", det_defect, c.det_tol));
    rep.push(Check::at_most("gradient_defect", family.gradient_defect, c.gradient_tol));
    rep.push(Check::at_most("immersion_j4_defect", tangent, c.tangent_tol));
    rep.push(Check::holds("potential_convex", convex));
    rep.push(Check::at_least("fd_residual_order", study.min_order(), c.order_min));
    ctx.field_csv("potential.csv", &family.potential)?;
    Ok(())
}

fn validate_motion(m: &Isometry) -> Result<(), CliError> {
    let ok = match *m {
        Isometry::Identity => true,
        Isometry::Flip { center, radius } => center.iter().all(|v| v.is_finite()) && radius > 0.0 && radius.is_finite(),
        Isometry::Similarity { scale, shift } => shift.iter().all(|v| v.is_finite()) && scale > 0.0 && scale.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(CliError::config("flat.motion has invalid parameters"))
    }
}

fn flat(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<(), CliError> {
    let c = &cfg.flat;
    c.surface.validate().map_err(CliError::config)?;
    c.window.validate().map_err(CliError::config)?;
    validate_motion(&c.motion)?;
    config::positive("flat.h", c.h)?;
    if c.levels < 2 {
        return Err(CliError::config("flat.levels must be at least 2"));
    }
    let expected = c.surface.expected_curvature();
    let mut g = c.window.grid(c.h).map_err(CliError::config)?;
    let mut errs = Vec::with_capacity(c.levels);
    let mut finest: Option<(SurfacePatch, maq_core::hyp3::FundamentalForms)> = None;
    for _ in 0..c.levels {
        let patch = flat_catalog(c.surface, g)
            .and_then(|p| p.moved(c.motion))
            .map_err(geometry_error)?;
        let forms = fundamental_forms(&patch).map_err(geometry_error)?;
        errs.push(forms.curvature.max_error_vs(|_, _| expected));
        finest = Some((patch, forms));
        g = g.refined();
    }
    let (patch, forms) = finest.expect("at least two levels");
    let want = c.surface.expected_shape().sym_eigenvalues();
    let shape_err = forms.shape.iter().fold(0.0f64, |acc, a| {
        let (lo, hi) = a.sym_eigenvalues();
        acc.max((lo - want.0).abs()).max((hi - want.1).abs())
    });
    let orders = orders_of(&errs);

    let rep = &mut ctx.report;
    rep.value("expected_curvature", expected);
    rep.value("curvature_errors", &errs);
    rep.value("curvature_orders", &orders);
    rep.value("normal_defect", patch.normal_defect());
    rep.value("second_form_symmetry_defect", forms.symmetry_defect());
    let last = *errs.last().expect("at least two levels");
    if errs.iter().all(|e| *e <= 1e-10) {
        // already at roundoff, so there is no order to observe
        rep.push(Check::at_most("curvature_error", last, 1e-10));
    } else {
        let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
        rep.push(Check::at_least("curvature_order", min_order, c.order_min));
    }
    rep.push(Check::at_most("shape_eigenvalue_error", shape_err, c.shape_tol));
    ctx.artifact("patch.csv", |buf| formats::write_patch(&patch, buf))?;
    ctx.field_csv("curvature.csv", &forms.curvature)?;
    Ok(())
}

fn tube(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<(), CliError> {
    let c = &cfg.tube;
    c.geodesic.validate().map_err(CliError::config)?;
    let [s0, s1] = config::range("tube.s_range", c.s_range)?;
    let [t0, t1] = config::range("tube.theta_range", c.theta_range)?;
    let g = Grid2D::covering(s0, s1, t0, t1, config::positive("tube.h", c.h)?).map_err(pde_error)?;
    if c.phi.iter().any(|p| !p.is_finite()) {
        return Err(CliError::config("tube.phi must be finite"));
    }
    let t = tube_surface(c.geodesic, g).map_err(geometry_error)?;
    let mut invariance = 0.0f64;
    let mut image = 0.0f64;
    for &phi in &c.phi {
        invariance = invariance.max(t.invariance_defect(phi).map_err(geometry_error)?);
        image = image.max(t.image_defect(phi).map_err(geometry_error)?);
    }

    let rep = &mut ctx.report;
    rep.value("tangent_defect", t.tangent_defect);
    rep.value("image_defect", image);
    rep.value("nodes", t.nodes.len());
    rep.push(Check::at_most("m_residual", t.m_residual, c.m_tol));
    rep.push(Check::at_most("jphi_invariance", invariance, c.invariance_tol));
    rep.push(Check::at_most("projection_defect", t.projection_defect, c.projection_tol));
    ctx.artifact("tube.csv", |buf| formats::write_tube(&t, buf))?;
    Ok(())
}

fn degenerate(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<(), CliError> {
    let c = &cfg.degenerate;
    let t = &c.thresholds;
    for (name, v) in [("tube_c0", t.tube_c0), ("surface_c0", t.surface_c0), ("max_second_form", t.max_second_form)] {
        config::nonnegative(&format!("degenerate.thresholds.{name}"), v)?;
    }
    let options = ExperimentOptions {
        h: config::positive("degenerate.h", c.h)?,
        margin: config::nonnegative("degenerate.margin", c.margin)?,
    };
    let report = degeneration_experiment(&c.family, &c.window, t, &options).map_err(|e| match e {
        DegenerationError::BadParameter(_) => CliError::config(e),
        DegenerationError::Geometry(g) => geometry_error(g),
        DegenerationError::NotAGraph { .. } => CliError::runtime(e),
    })?;
    let expect = c.expect.unwrap_or(match c.family {
        Family::Equidistant { .. } => Verdict::TubeLike,
        Family::TranslatedHorospheres { .. } => Verdict::SurfaceLike,
    });
    let monotone = report.steps.windows(2).all(|w| w[1].c0 <= w[0].c0);

    let rep = &mut ctx.report;
    rep.value("steps", &report.steps);
    rep.value("final_verdict", report.final_verdict());
    rep.value("expected_verdict", expect);
    rep.value("strictly_decreasing", report.strictly_decreasing());
    rep.push(Check::holds("c0_non_increasing", monotone));
    rep.push(Check::holds("final_verdict", report.final_verdict() == Some(expect)));
    ctx.artifact("convergence.csv", |buf| formats::write_convergence(&report, buf))?;
    Ok(())
}

fn solve(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<(), CliError> {
    let c = &cfg.solve;
    let g = c.grid.grid()?;
    c.boundary.check_domain(&g)?;
    let opts = c.newton.options();
    config::positive("solve.newton.tol", opts.tol)?;
    config::positive("solve.error_tol", c.error_tol)?;
    let name: NamedField = c.boundary;
    let data = ScalarField2D::from_fn(g, move |x, y| name.eval(x, y));
    match newton_ma_solve(&data, None, &opts) {
        Ok(sol) => {
            let rep = &mut ctx.report;
            rep.value("iterations", sol.iterations);
            rep.value("history", &sol.history);
            rep.push(Check::at_most("residual", sol.residual, opts.tol));
            rep.push(Check::holds("convex", sol.convex));
            if name.solves_unit_equation() {
                rep.push(Check::at_most("error_vs_exact", sol.u.max_error_vs(|x, y| name.eval(x, y)), c.error_tol));
            }
            ctx.field_csv("solution.csv", &sol.u)?;
        }
        Err(PdeError::NotConverged { iterations, residual }) => {
            ctx.report.value("iterations", iterations);
            ctx.report.push(Check::at_most("residual", residual, opts.tol));
        }
        Err(e) => return Err(pde_error(e)),
    }
    Ok(())
}
