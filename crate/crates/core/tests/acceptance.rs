use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use crossfield::analysis::cell_windings;
use crossfield::asymptotics::{
    align, cube_vertices, cuboctahedron_vertices, fekete_optimize, log_interaction_energy, optimal_square_height,
    tilt_samples, tilt_sweep, PointConfiguration, DEFAULT_SQUARE_HEIGHT,
};
use crossfield::audit::{audit, counting_identities};
use crossfield::fem::{gl_energy, gl_weak_residual, EpsilonPolicy, GlProblem, NewtonOptions};
use crossfield::generate;
use crossfield::mesh::{load_mesh, mean_edge_length, topology_report, FacetMesh, LoadedMesh, SurfaceMesh, Vec3};
use crossfield::report::{run_solve, Run, Timings};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

#[derive(Default)]
struct Verdicts {
    lines: Vec<(bool, String)>,
}

impl Verdicts {
    fn record(&mut self, pass: bool, text: String) {
        println!("{} {text}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((pass, text));
    }
}

/// Every converged run, for the weak-residual and winding-sum checks.
#[derive(Default)]
struct RunLog {
    weak: Vec<(String, f64)>,
    closed_windings: Vec<(String, i64, i64)>,
}

impl RunLog {
    fn note(&mut self, name: &str, run: &Run) {
        if !run.report.convergence.converged {
            return;
        }
        self.weak.push((name.to_string(), run.report.convergence.weak_residual));
        let topo = &run.report.topology;
        if topo.boundary_edges == 0 {
            let n = run.report.solver.symmetry as i64;
            self.closed_windings.push((name.to_string(), run.windings.total(), n * topo.chi));
        }
    }
}

fn options(eps: f64) -> NewtonOptions {
    NewtonOptions {
        tol: TOL,
        epsilon: EpsilonPolicy::Value(eps),
        ..Default::default()
    }
}

fn solve<'m>(mesh: &'m SurfaceMesh, n: u32, eps: f64) -> Run<'m> {
    run_solve(mesh, None, n, &options(eps), Timings::default()).expect("solve runs")
}

fn quarter(k: i64, n: i64) -> Ratio<i64> {
    Ratio::new(k, n)
}

fn positions(run: &Run) -> Vec<Vec3> {
    run.report.singularities.iter().map(|s| s.position).collect()
}

fn sphere_criterion(v: &mut Verdicts, log: &mut RunLog, sphere: &SurfaceMesh, n: u32) -> Vec<Vec3> {
    let start = Instant::now();
    let run = solve(sphere, n, 0.1);
    let seconds = start.elapsed().as_secs_f64();
    log.note(&format!("sphere N={n}"), &run);
    let c = &run.report.convergence;
    let s = &run.report.singularities;
    let q = quarter(1, n as i64);
    let expected = if n == 4 { 8 } else { 12 };
    let sum: Ratio<i64> = s.iter().map(|x| x.index).sum();
    let pass = c.converged
        && c.final_residual <= TOL
        && c.iterations <= 60
        && s.len() == expected
        && s.iter().all(|x| x.index == q)
        && sum == Ratio::from_integer(2)
        && run.report.poincare_hopf.pass
        && (n != 4 || seconds <= 60.0);
    let label = if n == 4 { 1 } else { 3 };
    v.record(
        pass,
        format!(
            "criterion {label}: sphere N={n}: {} iterations, residual {:.2e}, {} singularities of index {}, sum {sum}, {seconds:.1} s",
            c.iterations,
            c.final_residual,
            s.len(),
            s.iter().map(|x| x.index.to_string()).collect::<Vec<_>>().join(","),
        ),
    );
    positions(&run)
}

fn alignment_line(v: &mut Verdicts, label: &str, found: &[Vec3], count: usize, h: f64) {
    let fekete = fekete_optimize(count, 0).expect("fekete runs");
    match align(found, &fekete.configuration.points) {
        Some(a) => v.record(
            a.max_distance <= 2.0 * h,
            format!(
                "{label}: alignment with fekete({count}) max {:.4} (rms {:.4}) vs 2h = {:.4}",
                a.max_distance,
                a.rms_distance,
                2.0 * h
            ),
        ),
        None => v.record(false, format!("{label}: {} singularities cannot be aligned with {count} points", found.len())),
    }
}

fn criterion_2_sweep(v: &mut Verdicts) {
    let angles = tilt_samples(91);
    let step = angles[1] - angles[0];
    let sweep = tilt_sweep(DEFAULT_SQUARE_HEIGHT, &angles).unwrap();
    let best = sweep.iter().min_by(|a, b| a.1.partial_cmp(&b.1).unwrap()).unwrap();
    v.record(
        (best.0 - std::f64::consts::FRAC_PI_4).abs() <= step + 1e-12,
        format!("criterion 2: tilt sweep minimum at {:.6} rad (pi/4 = {:.6}, step {step:.6})", best.0, std::f64::consts::FRAC_PI_4),
    );
}

fn reference_configurations(v: &mut Verdicts) {
    let f8 = fekete_optimize(8, 0).unwrap();
    let f12 = fekete_optimize(12, 0).unwrap();
    let (height, anticube) = optimal_square_height(std::f64::consts::FRAC_PI_4).unwrap();
    let anticube = anticube / std::f64::consts::PI;
    v.record(
        (f8.energy - anticube).abs() <= 1e-4,
        format!("anticube: fekete(8) energy {:.8} vs best square antiprism {anticube:.8} (h = {height:.5})", f8.energy),
    );
    let energy_of = |pts: Vec<Vec3>| log_interaction_energy(&PointConfiguration::unit_charges(pts).unwrap()).unwrap();
    let cube = energy_of(cube_vertices()) / std::f64::consts::PI;
    let cubocta = energy_of(cuboctahedron_vertices()) / std::f64::consts::PI;
    v.record(
        f8.energy < cube && f12.energy < cubocta,
        format!(
            "optimal configurations: fekete(8) {:.6} < cube {cube:.6}; fekete(12) {:.6} < cuboctahedron {cubocta:.6}",
            f8.energy, f12.energy
        ),
    );
    let pts = &f12.configuration.points;
    let mut nearest = Vec::new();
    let mut gap = f64::INFINITY;
    for (i, p) in pts.iter().enumerate() {
        let mut d: Vec<f64> = pts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| (p - q).norm()).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nearest.extend_from_slice(&d[..5]);
        gap = gap.min(d[5] - d[4]);
    }
    let spread = nearest.iter().fold(f64::NEG_INFINITY, |a: f64, &b| a.max(b))
        - nearest.iter().fold(f64::INFINITY, |a: f64, &b| a.min(b));
    v.record(
        spread <= 1e-4 && gap > 0.1,
        format!("icosahedron: five equal nearest neighbours per point, spread {spread:.2e}, gap to sixth {gap:.3}"),
    );
}

fn criterion_4(v: &mut Verdicts, log: &mut RunLog) {
    let square = generate::square_grid(12, 12, 1.0);
    let run = solve(&square, 4, 0.2);
    log.note("square", &run);
    let ph = &run.report.poincare_hopf;
    v.record(
        run.report.convergence.converged
            && run.report.singularities.is_empty()
            && Ratio::from(ph.boundary_corner_sum) == Ratio::from_integer(1)
            && ph.pass,
        format!(
            "criterion 4: unit square: {} interior singularities, corner sum {}, Poincare-Hopf {}",
            run.report.singularities.len(),
            Ratio::from(ph.boundary_corner_sum),
            ph.pass
        ),
    );

    let l = generate::l_shape(6);
    let run = solve(&l, 4, 0.15);
    log.note("L-shape", &run);
    let ph = &run.report.poincare_hopf;
    let total = Ratio::from(ph.interior_index_sum) + Ratio::from(ph.boundary_corner_sum);
    v.record(
        run.report.convergence.converged && total == Ratio::from_integer(1) && ph.pass,
        format!(
            "criterion 4: L-shape: interior {} + corners {} = {total}",
            Ratio::from(ph.interior_index_sum),
            Ratio::from(ph.boundary_corner_sum)
        ),
    );

    let disk = generate::jitter_planar_interior(&generate::disk(9, 6, 1.0), 0.3, 0);
    for eps in [0.1, 0.2, 0.3] {
        let run = solve(&disk, 4, eps);
        log.note(&format!("disk eps={eps}"), &run);
        let s = &run.report.singularities;
        let sum: Ratio<i64> = s.iter().map(|x| x.index).sum();
        v.record(
            run.report.convergence.converged
                && s.len() == 4
                && s.iter().all(|x| x.index == quarter(1, 4))
                && sum == Ratio::from_integer(1)
                && run.report.poincare_hopf.pass,
            format!("criterion 4: disk of diameter 2, eps {eps}: {} singularities, index sum {sum}", s.len()),
        );
    }
}

fn criterion_5(v: &mut Verdicts) {
    let disk = generate::jitter_planar_interior(&generate::disk(4, 6, 1.0), 0.3, 5);
    let quads = [
        ("structured square", generate::quad_grid(8, 8)),
        ("subdivided L-shape", generate::subdivide_quads(&generate::quad_l_shape(3))),
        ("cylinder", generate::quad_cylinder(10, 4)),
        ("refined random square", generate::triangles_to_quads(&generate::random_square(6, 0.3, 4))),
        ("refined jittered disk", generate::subdivide_quads(&generate::triangles_to_quads(&disk))),
        ("quad disk", generate::quad_disk(3)),
    ];
    for (name, mesh) in &quads {
        let a = audit(mesh).unwrap();
        v.record(
            a.consistent && a.index_sum() == Ratio::from_integer(a.chi),
            format!("criterion 5: {name}: index sum {} = chi {}", a.index_sum(), a.chi),
        );
    }
    let cylinder_chi = topology_report(&quads[2].1).unwrap().chi;
    v.record(cylinder_chi == 0, format!("criterion 5: cylinder chi = {cylinder_chi}"));

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let mut checked = 0;
    let mut bad = Vec::new();
    for path in files {
        let Ok(mesh) = load_mesh(&path, None) else { continue };
        let ids = match &mesh {
            LoadedMesh::Triangles(m) => counting_identities(m),
            LoadedMesh::Quads(m) => counting_identities(m),
        }
        .unwrap();
        checked += 1;
        if !(ids.facet_edge_count && ids.vertex_facet_count) {
            bad.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    v.record(
        bad.is_empty() && checked >= 10,
        format!("criterion 5: counting identities on {checked} corpus meshes, failures {bad:?}"),
    );
}

fn criterion_6(v: &mut Verdicts) {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mesh = generate::random_square(4, 0.3, seed);
        let problem = GlProblem::new(&mesh, 4).unwrap();
        let eps = 0.25;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field: Vec<[f64; 2]> =
            (0..problem.edge_count()).map(|_| [rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)]).collect();
        let grad = gl_weak_residual(&problem, &field, eps);
        let fd: Vec<f64> = (0..2 * field.len())
            .map(|k| {
                let (e, c) = (k / 2, k % 2);
                let h = 1e-6;
                let mut p = field.clone();
                let mut m = field.clone();
                p[e][c] += h;
                m[e][c] -= h;
                (gl_energy(&problem, &p, eps).total - gl_energy(&problem, &m, eps).total) / (2.0 * h)
            })
            .collect();
        let g: Vec<f64> = grad.iter().flatten().copied().collect();
        let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        worst = worst.max(diff / norm);
    }
    v.record(worst <= 1e-5, format!("criterion 6: gradient vs central differences, worst relative error {worst:.2e} over 20 meshes"));

    let mut asym: f64 = 0.0;
    for (mesh, n) in [(generate::random_square(6, 0.3, 9), 4), (generate::icosphere(3), 4), (generate::torus(12, 8, 1.0, 0.4), 6)] {
        let problem = GlProblem::new(&mesh, n).unwrap();
        let field: Vec<[f64; 2]> =
            (0..problem.edge_count()).map(|e| [(e as f64 * 0.37).cos(), (e as f64 * 0.91).sin()]).collect();
        asym = asym.max(problem.assembled_matrix(&field, 0.15).asymmetry());
    }
    v.record(asym <= 1e-12, format!("criterion 6: assembled matrix asymmetry {asym:.2e}"));

    let mut drift: f64 = 0.0;
    let cases = [
        (generate::jitter_planar_interior(&generate::disk(7, 6, 1.0), 0.3, 1), 0.2),
        (generate::icosphere(4), 0.3),
    ];
    for (mesh, eps) in &cases {
        let reference = pair_values(mesh, *eps);
        for seed in 0..3 {
            let shuffled = generate::shuffle_triangles(mesh, seed);
            for (pair, value) in pair_values(&shuffled, *eps) {
                let r = reference[&pair];
                drift = drift.max((r[0] - value[0]).abs()).max((r[1] - value[1]).abs());
            }
        }
    }
    v.record(drift <= 1e-9, format!("criterion 6: element reordering changes the solution by {drift:.2e}"));
}

fn pair_values(mesh: &SurfaceMesh, eps: f64) -> HashMap<[usize; 2], [f64; 2]> {
    let problem = GlProblem::new(mesh, 4).unwrap();
    let (field, log, _) = problem.newton_solve(&options(eps)).unwrap();
    assert!(log.converged);
    mesh.edges().iter().map(|e| e.vertices).zip(field.values).collect()
}

fn closed_runs(log: &mut RunLog) {
    let torus = generate::torus(30, 12, 1.0, 0.4);
    let octa = generate::octahedron();
    let ico = generate::icosphere(4);
    for (name, mesh, n, eps) in [("torus", &torus, 4, 0.15), ("octahedron", &octa, 4, 0.5), ("icosphere N=6", &ico, 6, 0.3)] {
        let run = solve(mesh, n, eps);
        log.note(name, &run);
        assert_eq!(run.windings.total(), cell_windings(&run.problem, &run.field).total());
    }
}

fn main() {
    let mut v = Verdicts::default();
    let mut log = RunLog::default();

    let sphere = generate::fibonacci_sphere(1482, 0.3, 7);
    let h = mean_edge_length(&sphere).unwrap();
    println!("sphere mesh: {} triangles, mean edge length {h:.4}", sphere.facet_count());

    let anticube = sphere_criterion(&mut v, &mut log, &sphere, 4);
    alignment_line(&mut v, "criterion 2: anticube", &anticube, 8, h);
    criterion_2_sweep(&mut v);
    let asterisk = sphere_criterion(&mut v, &mut log, &sphere, 6);
    alignment_line(&mut v, "criterion 3: icosahedron", &asterisk, 12, h);
    reference_configurations(&mut v);
    criterion_4(&mut v, &mut log);
    criterion_5(&mut v);
    criterion_6(&mut v);
    closed_runs(&mut log);

    let bad: Vec<_> = log.closed_windings.iter().filter(|(_, w, t)| w != t).collect();
    v.record(
        bad.is_empty() && !log.closed_windings.is_empty(),
        format!(
            "criterion 6: winding sum equals N chi on {} converged closed runs ({})",
            log.closed_windings.len(),
            log.closed_windings.iter().map(|(n, w, _)| format!("{n}: {w}")).collect::<Vec<_>>().join(", ")
        ),
    );
    let worst = log.weak.iter().map(|x| x.1).fold(0.0, f64::max);
    v.record(
        worst <= 10.0 * TOL,
        format!("criterion 7: weak residual at most {worst:.2e} over {} converged runs (bound {:.0e})", log.weak.len(), 10.0 * TOL),
    );

    let failed = v.lines.iter().filter(|l| !l.0).count();
    println!("{} passed, {failed} failed", v.lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
