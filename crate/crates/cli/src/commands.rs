use std::fs;
use std::io::{self, Write};
use std::path::Path;

use boxing_core::content::{hc_dyadic, hc_dyadic_bruteforce, hc_sandwich, ContentParams};
use boxing_core::cover::{build_collar_cover, build_qp_cover, choose_epsilon, CalibratedConstants, EpsilonMode};
use boxing_core::dyadic::VoxelSet;
use boxing_core::experiment::{
    ball_configuration, calibrate_c_scale, load_voxels, run_experiment, run_pipeline, ExperimentKind,
    ExperimentSpec, GeneratorSpec, InputSource, PipelineSpec,
};
use boxing_core::goodballs::{constants_table, finite_dim_reduce};
use boxing_core::json::to_json;
use boxing_core::svg::{render_svg, Overlays};
use boxing_core::Error;
use serde_json::{json, Value};

use crate::{CellsInput, Cli, Command, Generator};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 2;
pub const EXIT_INPUT: u8 = 3;

fn generator(c: &CellsInput, seed: u64) -> GeneratorSpec {
    match c.generator {
        Generator::Random => GeneratorSpec::RandomCells {
            n: c.n,
            side: c.side,
            fill: c.fill,
            seed,
        },
        Generator::TwoScale => GeneratorSpec::TwoScale {
            n: c.n,
            side: c.side,
            seed,
        },
        Generator::Connected => GeneratorSpec::ConnectedDomain {
            n: c.n,
            side: c.side,
            cells: c.cells,
            seed,
        },
    }
}

fn source(c: &CellsInput, seed: u64) -> InputSource {
    match &c.input {
        Some(p) => InputSource::File(p.clone()),
        None => InputSource::Generator(generator(c, seed)),
    }
}

fn voxels(c: &CellsInput, seed: u64) -> Result<VoxelSet, Error> {
    match &c.input {
        Some(p) => load_voxels(p),
        None => generator(c, seed).voxels(),
    }
}

fn input_n(c: &CellsInput) -> Result<usize, Error> {
    match &c.input {
        Some(p) => Ok(load_voxels(p)?.n()),
        None => Ok(c.n),
    }
}

fn emit(cli: &Cli, value: &Value) -> Result<(), Error> {
    let text = to_json(value)?;
    match &cli.json_out {
        Some(p) => write_file(p, &text),
        None => to_stdout(&format!("{text}\n")),
    }
}

/// A reader that hangs up early, like `head`, is not an error.
fn to_stdout(text: &str) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Error::Input(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn write_file(p: &Path, text: &str) -> Result<(), Error> {
    fs::write(p, text).map_err(|e| Error::Input(format!("{}: {e}", p.display())))
}

fn practical(epsilon: Option<f64>) -> CalibratedConstants {
    CalibratedConstants {
        practical_epsilon: epsilon,
        ..Default::default()
    }
}

fn value<T: serde::Serialize>(v: &T) -> Result<Value, Error> {
    serde_json::to_value(v).map_err(|e| Error::Input(e.to_string()))
}

/// Runs the command; returns whether every check passed with its report.
fn execute(cli: &Cli) -> Result<(bool, Value), Error> {
    let seed = cli.seed;
    match &cli.command {
        Command::Content { cells, m, brute } => {
            let x = voxels(cells, seed)?;
            let params = ContentParams::new(*m, x.n())?;
            let res = hc_dyadic(&x, &params);
            let (lower, upper) = hc_sandwich(&x, &params);
            let mut out = json!({
                "command": "content",
                "m": m,
                "cells": x.len(),
                "hc_dyadic": res.value,
                "sandwich": [lower, upper],
                "witness_cover": value(&res.witness_cover)?,
            });
            let mut passed = true;
            if *brute {
                let b = hc_dyadic_bruteforce(&x, &params, x.base_level() + 8)?;
                passed = (b - res.value).abs() <= 1e-12 * b.max(1e-300);
                out["bruteforce"] = json!(b);
            }
            Ok((passed, out))
        }
        Command::Cover { cells, m, epsilon } => {
            let x = voxels(cells, seed)?;
            let params = ContentParams::new(*m, x.n())?;
            let eps = choose_epsilon(x.n(), *m, EpsilonMode::Practical, &practical(*epsilon))?;
            let (qp, qpp, chain) = build_qp_cover(&x, &eps, &params)?;
            let (collar, checks) = build_collar_cover(&qp, &qpp, &x, &eps, &params)?;
            let passed = chain.holds && checks.all_hold();
            Ok((
                passed,
                json!({
                    "command": "cover",
                    "epsilon": value(&eps)?,
                    "qpp": value(&qpp)?,
                    "qp": value(&qp)?,
                    "collar": value(&collar)?,
                    "chain": value(&chain)?,
                    "collar_checks": value(&checks)?,
                }),
            ))
        }
        Command::Fill { cells, m, epsilon } => {
            let x = voxels(cells, seed)?;
            let mut spec = PipelineSpec::new(*m);
            spec.constants.practical_epsilon = *epsilon;
            spec.cascade.seed = seed;
            spec.keep_log = true;
            let r = run_pipeline::<f64>(&x, &spec)?;
            Ok((r.passed(), json!({ "command": "fill", "report": value(&r)? })))
        }
        Command::Goodballs {
            input,
            n,
            m,
            clusters,
            per_cluster,
            runs,
        } => {
            let mut spec = ExperimentSpec::new(ExperimentKind::SelectionSuite, *n, vec![*m]);
            spec.runs = *runs;
            spec.input = Some(match input {
                Some(p) => {
                    spec.n = boxing_core::experiment::load_points(p)?.n;
                    InputSource::File(p.clone())
                }
                None => InputSource::Generator(GeneratorSpec::PointClusters {
                    n: *n,
                    clusters: *clusters,
                    per_cluster: *per_cluster,
                    spread: 6,
                    spacing: 20_000,
                    seed,
                }),
            });
            let r = run_experiment(&spec)?;
            Ok((r.passed, value(&r)?))
        }
        Command::Constants { m_max } => {
            let mut spec = ExperimentSpec::new(ExperimentKind::ConstantsAudit, 2, vec![*m_max as f64]);
            spec.n = (*m_max as usize).max(2);
            let r = run_experiment(&spec)?;
            let mut v = value(&r)?;
            v["results"]["table"] = value(&constants_table(*m_max)?)?;
            Ok((r.passed, v))
        }
        Command::Reduce {
            n,
            m,
            balls,
            points,
            delta,
        } => {
            let (bs, pts) = ball_configuration(*n, *balls, *points, seed)?;
            let r = finite_dim_reduce(&pts, &bs, *delta, *m)?;
            let passed = r.images_in_double && r.segments_in_double && r.content_holds;
            Ok((
                passed,
                json!({ "command": "reduce", "balls": value(&bs)?, "report": value(&r)? }),
            ))
        }
        Command::BoxingRatio { cells, m, runs } => {
            let mut spec = ExperimentSpec::new(ExperimentKind::BoxingRatio, input_n(cells)?, m.clone());
            spec.input = Some(source(cells, seed));
            spec.runs = *runs;
            let r = run_experiment(&spec)?;
            Ok((r.passed, value(&r)?))
        }
        Command::Pipeline { cells, m, epsilon, runs } => {
            let mut spec = ExperimentSpec::new(ExperimentKind::CascadePipeline, input_n(cells)?, vec![*m]);
            spec.input = Some(source(cells, seed));
            spec.runs = *runs;
            spec.practical_epsilon = *epsilon;
            spec.cascade_seed = seed;
            let r = run_experiment(&spec)?;
            Ok((r.passed, value(&r)?))
        }
        Command::Svg { cells, m, overlay, out } => {
            let x = voxels(cells, seed)?;
            if x.n() != 2 {
                return Err(Error::UnsupportedDimension(format!("SVG output needs n = 2, got {}", x.n())));
            }
            let mut overlays = Overlays::default();
            let mut spec = PipelineSpec::new(*m);
            spec.cascade.seed = seed;
            let wants = |name: &str| overlay.iter().any(|o| o == name);
            let mut passed = true;
            if wants("cover") {
                let params = ContentParams::new(*m, 2)?;
                let eps = choose_epsilon(2, *m, EpsilonMode::Practical, &practical(None))?;
                let (qp, qpp, _) = build_qp_cover(&x, &eps, &params)?;
                let (collar, _) = build_collar_cover(&qp, &qpp, &x, &eps, &params)?;
                overlays.covers.push(collar);
            }
            if wants("cascade") {
                let params = ContentParams::new(*m, 2)?;
                let eps = choose_epsilon(2, *m, EpsilonMode::Practical, &practical(None))?;
                let (qp, qpp, _) = build_qp_cover(&x, &eps, &params)?;
                let (collar, _) = build_collar_cover(&qp, &qpp, &x, &eps, &params)?;
                let state = boxing_core::cascade::init_cascade(&x, &collar, &params, spec.sampling, spec.cascade.clone())?;
                let (state, report) = boxing_core::cascade::run_cascade(state)?;
                passed = report.all_on_traces && report.trajectory_bound_holds;
                overlays.trajectories = state.samples.iter().map(|s| s.trajectory.clone()).collect();
                overlays.traces = state.traces.iter().map(|t| t.vertices.clone()).collect();
            }
            let svg = render_svg(&x, &overlays)?;
            let out_path = out.clone();
            match &out_path {
                Some(p) => write_file(p, &svg)?,
                None if cli.json_out.is_none() => to_stdout(&svg)?,
                None => {}
            }
            Ok((
                passed,
                json!({
                    "command": "svg",
                    "bytes": svg.len(),
                    "polylines": overlays.trajectories.len(),
                    "traces": overlays.traces.len(),
                    "rects": overlays.covers.iter().map(|c| c.len()).sum::<usize>(),
                    "written_to": out_path.map(|p| p.display().to_string()),
                }),
            ))
        }
        Command::Calibrate { cells, m, runs } => {
            let inputs = (0..*runs as u64)
                .map(|i| voxels(cells, seed + i))
                .collect::<Result<Vec<_>, _>>()?;
            let r = calibrate_c_scale(&inputs, &PipelineSpec::new(*m))?;
            Ok((true, json!({ "command": "calibrate", "report": value(&r)? })))
        }
    }
}

/// Exit code: 0 when every check passed, 2 on a failed check or violated
/// invariant, 3 on bad input.
pub fn run(cli: &Cli) -> u8 {
    match execute(cli) {
        Ok((passed, report)) => {
            // an svg already printed to stdout leaves no room for JSON
            let svg_on_stdout = matches!(&cli.command, Command::Svg { out: None, .. }) && cli.json_out.is_none();
            if !svg_on_stdout {
                if let Err(e) = emit(cli, &report) {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            }
            if passed {
                EXIT_PASS
            } else {
                eprintln!("checks failed");
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_invariant() {
                EXIT_FAIL
            } else {
                EXIT_INPUT
            }
        }
    }
}
