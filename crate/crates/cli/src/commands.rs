//! Command implementations.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use loopbie::bie::{tested_excitation, Discretization, KernelPair, OperatorSet, PlaneWave, Wavenumber};
use loopbie::constants::wavenumber;
use loopbie::fmm::{edge_neighbours, two_patch_study, FmmOperators};
use loopbie::lbo::{self, LboMatrices};
use loopbie::mesh::{loop_subdivide, read_mesh, write_obj, ControlMesh, PatchKind, PatchTable};
use loopbie::postproc::{far_field, far_field_error, mie_reference, phi_cut, FarFieldPattern};
use loopbie::solver::{compress_mh, solve_loop, solve_mh, GramSolver, Operators, SolveResult};
use loopbie::surface::{mean_curvature_max, BaseRule, TriangleQuadrature};
use loopbie::{Vec3, C64};

use crate::config::{Basis, Command, RunFile};
use crate::error::{Context, Result};
use crate::report::{emit_summary, emit_timing, write_output, Provenance, SummaryRow};

/// Files written by a command and a short human-readable report.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub report: String,
}

impl Outcome {
    fn write(&mut self, file: &RunFile, name: &str, contents: &str) -> Result<()> {
        self.files.push(write_output(&file.output_dir(), name, contents)?);
        Ok(())
    }
}

/// Runs the validated command of `file`.
pub fn run(file: &RunFile, prov: &Provenance) -> Result<Outcome> {
    let mut out = Outcome::default();
    let echo: String = file.text.lines().map(|l| format!("# | {l}\n")).collect();
    out.write(file, "run.toml", &format!("{}{}\n# run file as given:\n{echo}", prov.comment(), file.resolved()))?;
    match file.config.command.expect("validated run file has a command") {
        Command::Validate => validate(file, prov, &mut out)?,
        Command::Subdivide => subdivide(file, prov, &mut out)?,
        Command::Eigs => eigs(file, prov, &mut out)?,
        Command::MhtStudy => mht_study(file, prov, &mut out)?,
        Command::Solve | Command::Rcs => solve(file, prov, &mut out)?,
        Command::FmmStudy => fmm_study(file, prov, &mut out)?,
    }
    Ok(out)
}

fn load_mesh(file: &RunFile) -> Result<ControlMesh> {
    let mesh = read_mesh(&file.mesh_path()).context("reading mesh")?;
    let s = file.config.mesh.scale;
    Ok(if s == 1.0 { mesh } else { mesh.map_positions(|p| p * s) })
}

fn diagonal(mesh: &ControlMesh) -> f64 {
    let (lo, hi) = mesh.bounding_box();
    (hi - lo).norm()
}

fn key_values(prov: &Provenance, rows: &[(String, String)]) -> String {
    let mut s = prov.comment();
    s.push_str("key,value\n");
    for (k, v) in rows {
        writeln!(s, "{k},{v}").expect("string write");
    }
    s
}

fn format_rows(rows: &[(String, String)]) -> String {
    rows.iter().map(|(k, v)| format!("{k:<24}{v}\n")).collect()
}

fn mesh_rows(mesh: &ControlMesh) -> Vec<(String, String)> {
    let val = mesh.valences();
    vec![
        ("vertices".into(), mesh.num_vertices().to_string()),
        ("faces".into(), mesh.num_faces().to_string()),
        ("edges".into(), mesh.num_edges().to_string()),
        ("euler_characteristic".into(), mesh.euler_characteristic().to_string()),
        ("valence_min".into(), val.iter().min().copied().unwrap_or(0).to_string()),
        ("valence_max".into(), val.iter().max().copied().unwrap_or(0).to_string()),
        ("extraordinary_vertices".into(), val.iter().filter(|&&v| v != 6).count().to_string()),
        ("bounding_box_diagonal".into(), format!("{:.6e}", diagonal(mesh))),
        ("mean_edge_length".into(), format!("{:.6e}", mesh.mean_edge_length())),
    ]
}

fn validate(file: &RunFile, prov: &Provenance, out: &mut Outcome) -> Result<()> {
    let mesh = load_mesh(file)?;
    let table = PatchTable::build(&mesh).context("building patches")?;
    let mut rows = mesh_rows(&mesh);
    let regular = table.patches().iter().filter(|p| p.kind == PatchKind::Regular).count();
    rows.extend([
        ("presubdivided".into(), table.presubdivided().to_string()),
        ("patches".into(), table.len().to_string()),
        ("regular_patches".into(), regular.to_string()),
        ("irregular_patches".into(), (table.len() - regular).to_string()),
        ("basis_vertices".into(), table.num_vertices().to_string()),
    ]);
    for (i, f) in file.config.wave.frequency.iter().enumerate() {
        let lam = 2.0 * PI / wavenumber(*f);
        rows.push((format!("electrical_size_{i}"), format!("{:.6}", diagonal(&mesh) / lam)));
        rows.push((format!("edge_wavelengths_{i}"), format!("{:.6}", table.mesh().mean_edge_length() / lam)));
    }
    out.write(file, "mesh_report.csv", &key_values(prov, &rows))?;
    out.report = format_rows(&rows);
    Ok(())
}

fn subdivide(file: &RunFile, prov: &Provenance, out: &mut Outcome) -> Result<()> {
    let mut mesh = load_mesh(file)?;
    for _ in 0..file.config.subdivide.levels {
        mesh = loop_subdivide(&mesh).context("subdividing")?;
    }
    out.write(file, "subdivided.obj", &format!("{}{}", prov.comment(), write_obj(&mesh)))?;
    let rows = mesh_rows(&mesh);
    out.write(file, "mesh_report.csv", &key_values(prov, &rows))?;
    out.report = format_rows(&rows);
    Ok(())
}

fn lbo_matrices(table: &PatchTable) -> Result<LboMatrices> {
    lbo::assemble(table, &lbo::default_rule()).context("assembling Laplace-Beltrami matrices")
}

fn eigs(file: &RunFile, prov: &Provenance, out: &mut Outcome) -> Result<()> {
    let table = PatchTable::build(&load_mesh(file)?).context("building patches")?;
    let m = lbo_matrices(&table)?;
    let count = file.config.eigs.count.min(table.num_vertices());
    let h = lbo::solve_pencil(&m.stiffness, &m.mass, count).context("eigensolver")?;
    let mut csv = prov.comment();
    csv.push_str("index,eigenvalue\n");
    for (i, l) in h.eigenvalues.iter().enumerate() {
        writeln!(csv, "{i},{l:.12e}").expect("string write");
    }
    out.write(file, "eigenvalues.csv", &csv)?;
    let rows = vec![
        ("vertices".into(), table.num_vertices().to_string()),
        ("eigenpairs".into(), h.len().to_string()),
        ("b_orthonormality_error".into(), format!("{:.3e}", h.b_orthonormality_error(&m.mass))),
        ("a_diagonal_error".into(), format!("{:.3e}", h.a_diagonal_error(&m.stiffness))),
    ];
    out.write(file, "eigs_checks.csv", &key_values(prov, &rows))?;
    out.report = format_rows(&rows);
    Ok(())
}

/// One solve and its far field.
pub struct Solved {
    pub row: SummaryRow,
    pub result: SolveResult,
    pub pattern: FarFieldPattern,
}

fn far_directions(file: &RunFile) -> Result<Vec<Vec3>> {
    let mut dirs = Vec::new();
    for phi in &file.config.output.phi_cuts {
        dirs.extend(phi_cut(*phi, file.config.output.theta_step).context("far-field directions")?);
    }
    Ok(dirs)
}

/// Solves at one frequency with the configured basis (both bases for `both`).
pub fn solve_frequency(file: &RunFile, table: &PatchTable, index: usize) -> Result<Vec<Solved>> {
    let cfg = &file.config;
    let freq = cfg.wave.frequency[index];
    let k = wavenumber(freq);
    let lam = 2.0 * PI / k;
    let start = Instant::now();
    let sigma = mean_curvature_max(table, 2).context("curvature")?;
    let kernels = KernelPair::new(Wavenumber::real(k), Wavenumber::regularizer(k, sigma));
    let disc = Discretization::new(table.clone(), cfg.quadrature.to_config(), lam).context("discretization")?;
    let system = cfg.solver.system();
    let radius = system.localization_wavelengths.map(|r| r * lam);
    let mass = lbo_matrices(table)?.mass;
    let [d, p] = [cfg.wave.direction, cfg.wave.polarization].map(Vec3::from);
    let wave = PlaneWave::new(d, p, k, cfg.wave.amplitude).context("incident wave")?;
    let (vt, vk) = tested_excitation(table, &disc.fine, &wave);
    let dirs = far_directions(file)?;
    let rule = TriangleQuadrature::new(2, BaseRule::Six);
    let mie = match cfg.reference.mie_radius {
        Some(r) => Some(mie_reference(r, &wave, &dirs).context("Mie reference")?),
        None => None,
    };
    let nv = table.num_vertices();
    let size = diagonal(table.mesh()) / lam;
    let finish = |label: &str, result: SolveResult, dof: usize, setup: f64| -> Result<Solved> {
        let pattern = far_field(table, &rule, &result.coefficients, k, &dirs, cfg.wave.amplitude).context("far field")?;
        let eps_mie = match &mie {
            Some(m) => Some(far_field_error(&pattern, m).context("far-field error")?),
            None => None,
        };
        Ok(Solved {
            row: SummaryRow {
                label: format!("f{index}-{label}"),
                frequency_hz: freq,
                electrical_size: size,
                vertices: nv,
                dof,
                iterations: result.iterations,
                gram_iterations: result.gram_iterations,
                final_residual: result.residual_history.last().copied().unwrap_or(0.0),
                eps_mie,
                eps_loop: None,
                wall_time: setup + result.wall_time,
            },
            result,
            pattern,
        })
    };
    let mut solved = Vec::new();
    if cfg.fmm.enabled {
        let ops = FmmOperators::new(&disc, kernels, radius, cfg.fmm.to_config(lam)).context("FMM operators")?;
        let gram = GramSolver::new(&ops.gram, &mass, system.gmres_tol_gram).context("Gram solver")?;
        let setup = start.elapsed().as_secs_f64();
        let r = solve_loop(&ops, &gram, &vt, &vk, &system).context("Loop solve")?;
        solved.push(finish("loop", r, 2 * nv, setup)?);
        return Ok(solved);
    }
    let ops = OperatorSet::assemble(&disc, kernels, radius).context("operator assembly")?;
    let setup = start.elapsed().as_secs_f64();
    if cfg.solver.basis != Basis::Mh {
        let gram = GramSolver::new(&ops.gram, &mass, system.gmres_tol_gram).context("Gram solver")?;
        let r = solve_loop(&ops as &dyn Operators, &gram, &vt, &vk, &system).context("Loop solve")?;
        solved.push(finish("loop", r, 2 * nv, setup)?);
    }
    if cfg.solver.basis != Basis::Loop {
        let m = cfg.solver.modes;
        if m >= nv {
            return Err(file.error("solver", "modes", format!("at most {} harmonics exist on this mesh", nv - 1)));
        }
        let t0 = Instant::now();
        let lbo = lbo_matrices(table)?;
        let h = lbo::solve_pencil(&lbo.stiffness, &lbo.mass, m + 1).context("eigensolver")?;
        let sys = compress_mh(&ops, &h.nonconstant(m), &vt, &vk, cfg.solver.scaled).context("manifold harmonic compression")?;
        let compress = t0.elapsed().as_secs_f64();
        let r = solve_mh(&sys, &system.outer()).context("manifold harmonic solve")?;
        let mut s = finish("mh", r, 2 * m, setup + compress)?;
        if let Some(reference) = solved.first() {
            s.row.eps_loop = Some(far_field_error(&s.pattern, &reference.pattern).context("far-field error")?);
        }
        solved.push(s);
    }
    Ok(solved)
}

fn solve_all(file: &RunFile, table: &PatchTable) -> Result<Vec<Solved>> {
    let mut all = Vec::new();
    for i in 0..file.config.wave.frequency.len() {
        all.extend(solve_frequency(file, table, i)?);
    }
    Ok(all)
}

fn write_summary(file: &RunFile, prov: &Provenance, out: &mut Outcome, solved: &[Solved]) -> Result<()> {
    let rows: Vec<SummaryRow> = solved.iter().map(|s| s.row.clone()).collect();
    out.write(file, "summary.csv", &emit_summary(&rows, prov))?;
    out.write(file, "timing.csv", &emit_timing(&rows, prov))?;
    out.report = emit_summary(&rows, prov);
    Ok(())
}

fn solve(file: &RunFile, prov: &Provenance, out: &mut Outcome) -> Result<()> {
    let table = PatchTable::build(&load_mesh(file)?).context("building patches")?;
    let solved = solve_all(file, &table)?;
    for s in &solved {
        let label = &s.row.label;
        if file.config.command == Some(Command::Rcs) {
            let mut csv = Vec::new();
            s.pattern.write_csv(&mut csv, &format!("{} label {label}", prov.tag())).context("far-field table")?;
            out.write(file, &format!("rcs_{label}.csv"), &String::from_utf8_lossy(&csv))?;
            continue;
        }
        let mut res = prov.comment();
        res.push_str("iteration,relative_residual\n");
        for (i, r) in s.result.residual_history.iter().enumerate() {
            writeln!(res, "{i},{r:.6e}").expect("string write");
        }
        out.write(file, &format!("residuals_{label}.csv"), &res)?;
        let nv = s.result.nv();
        let mut cur = prov.comment();
        cur.push_str("vertex,re_a1,im_a1,re_a2,im_a2\n");
        for i in 0..nv {
            let (a, b) = (s.result.coefficients[i], s.result.coefficients[nv + i]);
            writeln!(cur, "{i},{:.12e},{:.12e},{:.12e},{:.12e}", a.re, a.im, b.re, b.im).expect("string write");
        }
        out.write(file, &format!("currents_{label}.csv"), &cur)?;
    }
    write_summary(file, prov, out, &solved)
}

/// Reconstruction error of the induced current for each requested number of harmonics.
pub fn mht_errors(file: &RunFile, table: &PatchTable, coefficients: &[C64]) -> Result<Vec<(usize, f64)>> {
    let nv = table.num_vertices();
    let m = lbo_matrices(table)?;
    let h = lbo::solve_pencil(&m.stiffness, &m.mass, nv).context("eigensolver")?;
    let full = h.len().saturating_sub(1);
    file.config
        .mht
        .modes
        .iter()
        .map(|mode| {
            let count = mode.resolve(full);
            if count > full {
                return Err(file.error("mht", "modes", format!("{count} exceeds the {full} available harmonics")));
            }
            let e = lbo::complex_reconstruction_error(&h, &m.stiffness, &m.mass, coefficients, count).context("reconstruction")?;
            Ok((count, e))
        })
        .collect()
}

fn mht_study(file: &RunFile, prov: &Provenance, out: &mut Outcome) -> Result<()> {
    let table = PatchTable::build(&load_mesh(file)?).context("building patches")?;
    let solved = solve_frequency(file, &table, 0)?;
    let current = &solved[0].result.coefficients;
    let errors = mht_errors(file, &table, current)?;
    let mut csv = prov.comment();
    csv.push_str("modes,epsilon\n");
    for (m, e) in &errors {
        writeln!(csv, "{m},{e:.6e}").expect("string write");
    }
    out.write(file, "mht_study.csv", &csv)?;
    write_summary(file, prov, out, &solved)?;
    out.report = csv;
    Ok(())
}

fn fmm_study(file: &RunFile, prov: &Provenance, out: &mut Outcome) -> Result<()> {
    let table = PatchTable::build(&load_mesh(file)?).context("building patches")?;
    let k = wavenumber(file.config.wave.frequency[0]);
    let lam = 2.0 * PI / k;
    let sigma = mean_curvature_max(&table, 2).context("curvature")?;
    let kernels = KernelPair::new(Wavenumber::real(k), Wavenumber::regularizer(k, sigma));
    let (a, b) = edge_neighbours(&table).context("patch pair")?;
    let study = &file.config.fmm_study;
    let mut csv = prov.comment();
    csv.push_str("leaf_wavelengths,p,error\n");
    let mut checks = prov.comment();
    checks.push_str("leaf_wavelengths,monotone,final_error\n");
    for leaf in &study.leaf_sizes {
        let rows = two_patch_study(&table, a, b, &kernels, leaf * lam, &study.orders).context("two-patch study")?;
        for (p, e) in &rows {
            writeln!(csv, "{leaf},{p},{e:.6e}").expect("string write");
        }
        let monotone = rows.windows(2).all(|w| w[1].1 <= w[0].1);
        writeln!(checks, "{leaf},{monotone},{:.6e}", rows.last().map(|r| r.1).unwrap_or(0.0)).expect("string write");
    }
    out.write(file, "fmm_study.csv", &csv)?;
    out.write(file, "fmm_study_checks.csv", &checks)?;
    out.report = checks;
    Ok(())
}
