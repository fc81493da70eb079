//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion with the measured quantities, and exits non-zero on failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use maq_core::convergence::{observed_order, RefinementStudy};
use maq_core::degeneration::{
    degeneration_experiment, quasi_maximum, quasi_maximum_holds, DiscreteMetricSpace, ExperimentOptions, Family,
    Thresholds, Verdict, Window,
};
use maq_core::hyp3::{
    flat_catalog, fundamental_forms, jholo_lift_residual, tube_surface, CatalogKind, GeodesicH3, Isometry,
    SurfacePatch,
};
use maq_core::ma_linear::{
    build_structures, calibration_residual, classify_graph_plane, classify_line, graph_form_values, LineClass, Mat2,
    Plane4,
};
use maq_core::ma_pde::{
    counterexample_det_hessian, counterexample_potential, hessian_fd, ma_residual, newton_ma_solve,
    positivity_field, Grid2D, NewtonOptions, Positivity, ScalarField2D,
};
use maq_core::quaternion::{spin_action, LinOp4, Quaternion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// Pinned tolerances.
const NORM_REL: f64 = 1e-12;
const KERNEL: f64 = 1e-10;
const ALGEBRA_SECONDS: f64 = 5.0;
const CALIBRATION: f64 = 1e-12;
const LEXICON: f64 = 1e-10;
const DET_ANALYTIC: f64 = 1e-12;
const ORDER_COUNTEREXAMPLE: f64 = 1.9;
const ORDER_GEOMETRY: f64 = 1.8;
const EIGEN_EQUIDISTANT: f64 = 5e-3;
const MISMATCH_FLOOR: f64 = 0.5;
const TUBE_NULL: f64 = 1e-8;
const TUBE_INVARIANCE: f64 = 1e-8;
const TUBE_FINAL_C0: f64 = 0.05;
const BASELINE_REL: f64 = 0.01;
const DEGENERATION_SECONDS: f64 = 60.0;
const NEWTON_QUADRATIC: f64 = 1e-8;
const ORDER_NEWTON: f64 = 1.8;

struct Outcome {
    pass: bool,
    detail: String,
}

type Potential = fn(f64, f64) -> f64;
type Criterion = fn() -> Outcome;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let x = Quaternion::random_box(&mut rng, 10.0);
        let y = Quaternion::random_box(&mut rng, 10.0);
        let lhs = (x * y).norm();
        let rhs = x.norm() * y.norm();
        if rhs > 0.0 {
            worst = worst.max((lhs - rhs).abs() / rhs);
        }
    }
    // kernel of the double cover
    let id = LinOp4::identity();
    let mut pairs = vec![
        (Quaternion::ONE, Quaternion::ONE),
        (-Quaternion::ONE, -Quaternion::ONE),
        (Quaternion::ONE, -Quaternion::ONE),
        (-Quaternion::ONE, Quaternion::ONE),
    ];
    for _ in 0..2000 {
        let q = Quaternion::random_unit(&mut rng);
        let r = Quaternion::random_unit(&mut rng);
        pairs.push((q, q));
        pairs.push((q, -q));
        pairs.push((q, r));
    }
    let mut kernel_hits = 0;
    let mut kernel_failures = 0;
    for (x, y) in pairs {
        let h = spin_action(x, y).expect("unit inputs");
        if h.approx_eq(&id, KERNEL) {
            kernel_hits += 1;
            let plus = x.max_abs_diff(Quaternion::ONE).max(y.max_abs_diff(Quaternion::ONE));
            let minus = x.max_abs_diff(-Quaternion::ONE).max(y.max_abs_diff(-Quaternion::ONE));
            if plus.min(minus) > KERNEL {
                kernel_failures += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= NORM_REL && kernel_failures == 0 && kernel_hits == 2 && secs < ALGEBRA_SECONDS,
        format!(
            "max rel norm defect {worst:.3e}, kernel hits {kernel_hits} (failures {kernel_failures}), {secs:.2}s"
        ),
    )
}

fn calibration() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let ijk = [Quaternion::I, Quaternion::J, Quaternion::K];
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = Plane4::random(&mut rng);
        worst = worst.max(calibration_residual(&p, &ijk).expect("valid triple"));
    }
    for _ in 0..100 {
        let q = Quaternion::random_unit(&mut rng);
        let triple = ijk.map(|e| q * e * q.conj());
        for _ in 0..10 {
            let p = Plane4::random(&mut rng);
            worst = worst.max(calibration_residual(&p, &triple).expect("valid triple"));
        }
    }
    outcome(worst <= CALIBRATION, format!("max residual {worst:.3e}"))
}

fn lexicon() -> Outcome {
    let pack = build_structures();
    let mut rng = StdRng::seed_from_u64(3);
    let mut disagreements = 0;
    let mut hits = [0usize; 3];
    for n in 0..10_000 {
        // mix generic matrices with ones on each lagrangian locus
        let mut a = Mat2::random(&mut rng, 2.0);
        match n % 4 {
            1 => {
                let s = a.det();
                if s > 0.1 {
                    a = a.scale(1.0 / s.sqrt());
                }
            }
            2 => a.m[1][1] = -a.m[0][0],
            3 => a.m[1][0] = a.m[0][1],
            _ => {}
        }
        let direct = graph_form_values(&pack, &a);
        let flags = [direct[0].abs() <= LEXICON, direct[1].abs() <= LEXICON, direct[2].abs() <= LEXICON];
        let predicates = [
            (a.det() - 1.0).abs() <= LEXICON,
            a.trace().abs() <= LEXICON,
            (a.m[0][1] - a.m[1][0]).abs() <= LEXICON,
        ];
        for k in 0..3 {
            hits[k] += predicates[k] as usize;
        }
        match classify_graph_plane(&pack, &a) {
            Ok(f) => {
                let lib = [f.omega_i, f.omega_j, f.omega_k];
                if lib != flags || flags != predicates {
                    disagreements += 1;
                }
            }
            Err(_) => disagreements += 1,
        }
    }
    outcome(
        disagreements == 0,
        format!("disagreements {disagreements}, on-locus samples {hits:?}"),
    )
}

fn counterexample() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = rng.gen_range(-1.0..1.0);
        let y = rng.gen_range(1.0..2.0);
        worst = worst.max((counterexample_det_hessian(x, y) - 1.0).abs());
    }
    let coarse = Grid2D::covering(-1.0, 1.0, 1.0, 2.0, 1.0 / 32.0).unwrap();
    let mut g = coarse;
    let mut hs = vec![];
    let mut errs = vec![];
    for _ in 0..3 {
        let u = ScalarField2D::from_fn(g, counterexample_potential);
        let r = ma_residual(&u).unwrap();
        hs.push(g.h);
        errs.push(r.max_error_on_common_nodes(&coarse, |_, _| 0.0));
        g = g.refined();
    }
    let study = RefinementStudy::new(hs, errs);
    let exact = counterexample_potential(2.0, 1.0) == 49.0 / 12.0;
    outcome(
        worst <= DET_ANALYTIC && study.min_order() >= ORDER_COUNTEREXAMPLE && exact,
        format!(
            "analytic det defect {worst:.3e}, FD residuals {:?}, orders {:?}, phi(2,1) exact {exact}",
            study.errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>(),
            study.orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn positivity() -> Outcome {
    let pack = build_structures();
    let g = Grid2D::covering(-1.0, 1.0, 1.0, 2.0, 1.0 / 16.0).unwrap();
    let funcs: [(&str, Potential); 5] = [
        ("exp(x)+y^2", |x, y| x.exp() + y * y),
        ("-cosh(x)-y^2+xy/4", |x, y| -x.cosh() - y * y + 0.25 * x * y),
        ("xy", |x, y| x * y),
        ("x^2-y^2+y^3/10", |x, y| x * x - y * y + 0.1 * y * y * y),
        ("counterexample", counterexample_potential),
    ];
    let mut rng = StdRng::seed_from_u64(5);
    let mut disagreements = 0;
    let mut seen = [0usize; 4];
    for (_, f) in funcs {
        let u = ScalarField2D::from_fn(g, f);
        let classes = positivity_field(&u).unwrap();
        let hess = hessian_fd(&u).unwrap();
        for _ in 0..200 {
            let i = rng.gen_range(1..g.nx - 1);
            let j = rng.gen_range(1..g.ny - 1);
            let class = classes.get(i, j).expect("interior node");
            let (a, b, c) = hess.at(i, j);
            let det = a * c - b * b;
            let h = Mat2::new(a, b, b, c);
            let line = if det > 0.0 {
                classify_line(&pack, &Plane4::graph(h.scale(1.0 / det.sqrt()))).ok()
            } else {
                // no multiple of an indefinite or degenerate Hessian has
                // determinant one, so its graph is never a complex line
                classify_line(&pack, &Plane4::graph(h)).ok()
            };
            let agree = matches!(
                (class, line),
                (Positivity::Positive, Some(LineClass::Positive))
                    | (Positivity::Negative, Some(LineClass::Negative))
                    | (Positivity::Indefinite, None)
                    | (Positivity::Null, None)
            );
            seen[class as usize] += 1;
            if !agree {
                disagreements += 1;
            }
        }
    }
    outcome(
        disagreements == 0,
        format!("1000 nodes, disagreements {disagreements}, classes [pos, null, neg, indef] {seen:?}"),
    )
}

fn max_curvature_error(p: &SurfacePatch, expected: f64) -> f64 {
    fundamental_forms(p).unwrap().curvature.max_error_vs(|_, _| expected)
}

fn catalog_sequence(kind: CatalogKind, motion: Isometry, h0: f64) -> Vec<SurfacePatch> {
    let mut g = Grid2D::covering(-1.0, 1.0, -1.0, 1.0, h0).unwrap();
    let mut out = vec![];
    for _ in 0..3 {
        out.push(flat_catalog(kind, g).unwrap().moved(motion).unwrap());
        g = g.refined();
    }
    out
}

fn orders(errs: &[f64]) -> Vec<f64> {
    errs.windows(2).map(|w| observed_order(w[0], w[1], 2.0)).collect()
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn flip() -> Isometry {
    Isometry::Flip { center: [0.3, -0.2], radius: 1.5 }
}

fn flat_catalog_check() -> Outcome {
    let horo: Vec<f64> = catalog_sequence(CatalogKind::Horosphere { c: 1.0 }, flip(), 1.0 / 16.0)
        .iter()
        .map(|p| max_curvature_error(p, 1.0))
        .collect();
    let equi: Vec<f64> = catalog_sequence(CatalogKind::Equidistant { d: 0.5 }, flip(), 1.0 / 16.0)
        .iter()
        .map(|p| max_curvature_error(p, 1.0))
        .collect();
    let (oh, oe) = (orders(&horo), orders(&equi));
    let g = Grid2D::covering(-1.0, 1.0, -1.0, 1.0, 1.0 / 128.0).unwrap();
    let mut eig = 0.0f64;
    for d in [0.3f64, 0.5, 1.0] {
        let f = fundamental_forms(&flat_catalog(CatalogKind::Equidistant { d }, g).unwrap()).unwrap();
        for a in &f.shape {
            let (lo, hi) = a.sym_eigenvalues();
            eig = eig.max((lo - d.tanh()).abs()).max((hi - 1.0 / d.tanh()).abs());
        }
    }
    let pass = oh.iter().chain(&oe).all(|o| *o >= ORDER_GEOMETRY) && eig <= EIGEN_EQUIDISTANT;
    outcome(
        pass,
        format!(
            "moved horosphere |K-1| {} orders {}, moved equidistant |K-1| {} orders {}, eigenvalue error at h=1/128 {eig:.3e}",
            fmt_list(&horo),
            fmt_list(&oh),
            fmt_list(&equi),
            fmt_list(&oe)
        ),
    )
}

fn gauss_lift_prescription() -> Outcome {
    let horo: Vec<f64> = catalog_sequence(CatalogKind::Horosphere { c: 1.0 }, flip(), 1.0 / 16.0)
        .iter()
        .map(|p| jholo_lift_residual(p, |_| 0.0).unwrap().max_curvature())
        .collect();
    let phi = (1.0f64 / 1.0f64.tanh()).ln();
    let mut g = Grid2D::covering(0.5, 2.5, -1.0, 1.0, 1.0 / 16.0).unwrap();
    let mut sphere = vec![];
    for _ in 0..3 {
        let p = flat_catalog(CatalogKind::GeodesicSphere { r: 1.0 }, g).unwrap();
        sphere.push(jholo_lift_residual(&p, |_| phi).unwrap().max_curvature());
        g = g.refined();
    }
    let plain = flat_catalog(
        CatalogKind::Horosphere { c: 1.0 },
        Grid2D::covering(-1.0, 1.0, -1.0, 1.0, 1.0 / 16.0).unwrap(),
    )
    .unwrap();
    let mismatch = jholo_lift_residual(&plain, |_| 1.0).unwrap().curvature;
    let floor = mismatch.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let (oh, os) = (orders(&horo), orders(&sphere));
    let pass = oh.iter().chain(&os).all(|o| *o >= ORDER_GEOMETRY) && floor >= MISMATCH_FLOOR;
    outcome(
        pass,
        format!(
            "horosphere/phi=0 {} orders {}, sphere r=1/phi=ln coth 1 {} orders {}, mismatched min residual {floor:.4}",
            fmt_list(&horo),
            fmt_list(&oh),
            fmt_list(&sphere),
            fmt_list(&os)
        ),
    )
}

fn tube() -> Outcome {
    let g = Grid2D::covering(-0.01, 0.01, -std::f64::consts::PI, -std::f64::consts::PI + 0.02, 1e-3).unwrap();
    let mut m_worst = 0.0f64;
    let mut inv_worst = 0.0f64;
    for geo in [
        GeodesicH3::Vertical { x0: 0.0, y0: 0.0 },
        GeodesicH3::HalfCircle { center: [0.5, 0.5], radius: 1.2, direction: [0.6, 0.8] },
    ] {
        let t = tube_surface(geo, g).unwrap();
        m_worst = m_worst.max(t.m_residual);
        for phi in [-0.5, 0.0, 0.7] {
            inv_worst = inv_worst.max(t.invariance_defect(phi).unwrap());
        }
    }
    outcome(
        m_worst <= TUBE_NULL && inv_worst <= TUBE_INVARIANCE,
        format!("m residual {m_worst:.3e}, J_phi invariance defect {inv_worst:.3e} at h=1e-3"),
    )
}

fn baseline_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/degeneration_baseline.json")
}

fn degeneration() -> Outcome {
    let start = Instant::now();
    let window = Window::new(-1.0, 1.0, -1.0, 1.0).unwrap();
    let family = Family::Equidistant { d: vec![0.5, 0.1, 0.02] };
    let report = match degeneration_experiment(&family, &window, &Thresholds::default(), &ExperimentOptions::default())
    {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("experiment failed: {e}")),
    };
    let c0: Vec<f64> = report.steps.iter().map(|s| s.c0).collect();
    let path = baseline_path();
    let (baseline_ok, note) = match std::fs::read_to_string(&path) {
        Ok(text) => {
            let base: Vec<f64> = serde_json::from_str(&text).expect("baseline is a JSON array of numbers");
            let ok = base.len() == c0.len()
                && base.iter().zip(&c0).all(|(b, c)| (b - c).abs() <= BASELINE_REL * b.abs());
            (ok, format!("baseline {}", fmt_list(&base)))
        }
        Err(_) => {
            std::fs::create_dir_all(path.parent().unwrap()).expect("create baseline directory");
            std::fs::write(&path, serde_json::to_string_pretty(&c0).unwrap()).expect("write baseline");
            (true, "baseline recorded".to_string())
        }
    };
    let secs = start.elapsed().as_secs_f64();
    let pass = report.strictly_decreasing()
        && c0.last().is_some_and(|c| *c <= TUBE_FINAL_C0)
        && report.final_verdict() == Some(Verdict::TubeLike)
        && baseline_ok
        && secs < DEGENERATION_SECONDS;
    outcome(
        pass,
        format!("C0 {} ({note}), final verdict {:?}, {secs:.2}s", fmt_list(&c0), report.final_verdict()),
    )
}

fn newton() -> Outcome {
    let g = Grid2D::covering(0.0, 1.0, 0.0, 1.0, 1.0 / 16.0).unwrap();
    // det [[2, 0.5], [0.5, 0.625]] = 1
    let q = |x: f64, y: f64| x * x + 0.5 * x * y + 0.3125 * y * y;
    let sol = newton_ma_solve(&ScalarField2D::from_fn(g, q), None, &NewtonOptions::default());
    let quad_err = sol.map(|s| s.u.max_error_vs(q)).unwrap_or(f64::INFINITY);
    let coarse = Grid2D::covering(-1.0, 1.0, 1.0, 2.0, 1.0 / 8.0).unwrap();
    let mut gg = coarse;
    let (mut hs, mut errs) = (vec![], vec![]);
    for _ in 0..3 {
        let b = ScalarField2D::from_fn(gg, counterexample_potential);
        let e = newton_ma_solve(&b, None, &NewtonOptions::default())
            .map(|s| s.u.max_error_on_common_nodes(&coarse, counterexample_potential))
            .unwrap_or(f64::INFINITY);
        hs.push(gg.h);
        errs.push(e);
        gg = gg.refined();
    }
    let study = RefinementStudy::new(hs, errs);
    outcome(
        quad_err <= NEWTON_QUADRATIC && study.min_order() >= ORDER_NEWTON,
        format!(
            "quadratic recovery error {quad_err:.3e}, manufactured errors {} orders {}",
            fmt_list(&study.errors),
            fmt_list(&study.orders)
        ),
    )
}

fn quasi_max() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let mut failures = 0;
    let mut checks = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=200);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..100.0)).collect();
        let space = DiscreteMetricSpace::from_planar_points(&pts, f).unwrap();
        for x in 0..n {
            let y = quasi_maximum(&space, x).unwrap();
            checks += 1;
            if !quasi_maximum_holds(&space, x, y) {
                failures += 1;
            }
        }
    }
    outcome(failures == 0, format!("{checks} starts over 1000 spaces, failures {failures}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("algebra suite", algebra),
        ("calibration identity", calibration),
        ("lagrangian lexicon", lexicon),
        ("half-plane counterexample", counterexample),
        ("positivity cross-check", positivity),
        ("flat catalog", flat_catalog_check),
        ("gauss-lift prescription", gauss_lift_prescription),
        ("curtain tube", tube),
        ("degeneration", degeneration),
        ("newton solver", newton),
        ("quasi-maximum", quasi_max),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "acceptance {:>2} {tag} {name}: {} [{:.2}s]",
            n + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
        failed += (!o.pass) as usize;
    }
    println!("acceptance summary: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
