use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orthotensor::cumulants::{cumulant_tensor, read_csv_file};
use orthotensor::decomposition::{decompose, decompose_odeco, decompose_sym};
use orthotensor::manifold::{compare_with_odeco, minimize, ObjectiveSpec, OptimizerConfig};
use orthotensor::pattern::{pattern_v, pattern_vdiag, pattern_vsym};
use orthotensor::spectral::{build_mq, codim_table_check, i_q, render_bits, svt_residual};
use orthotensor::synth::sample_instance;
use orthotensor::tns::{format_tns, parse_tns};
use orthotensor::variety::{membership_float, membership_value, parse_rational, BinarySymCoords};
use orthotensor::{DenseTensor, Error, Tolerances};

use crate::report::{list, num, Report};
use crate::{read_input, source_name, CliError, CliResult, Command, OptArgs};

type Outcome = (Report, Option<String>);

pub fn dispatch(command: Command) -> CliResult<Outcome> {
    match command {
        Command::Decompose {
            input,
            opt,
            sym,
            odeco,
            core_out,
            factors_out,
        } => run_decompose(input.as_deref(), &opt, sym, odeco, core_out.as_deref(), factors_out.as_deref()),
        Command::Distance { input, opt, sym, odeco } => run_distance(input.as_deref(), &opt, sym, odeco),
        Command::Cumulant { order, csv, tensor_out } => run_cumulant(order, &csv, tensor_out.as_deref()),
        Command::Verify {
            input,
            vectors,
            vectors_file,
        } => run_verify(&input, vectors.as_deref(), vectors_file.as_deref()),
        Command::Mq { q, swaps } => run_mq(&q, swaps.as_deref()),
        Command::Member2d { d, t, exact, budget } => run_member2d(d, &t, exact, budget),
        Command::Pattern { shape, sym, odeco } => run_pattern(&shape, sym, odeco),
        Command::Gen {
            shape,
            seed,
            sym,
            tensor_out,
            core_out,
        } => run_gen(&shape, seed, sym, tensor_out.as_deref(), core_out.as_deref()),
        Command::DimCheck { shape, sym, seed } => run_dim_check(&shape, sym, seed),
        Command::CodimTable { d } => run_codim_table(d),
    }
}

fn usage_err(flag: &str, err: impl std::fmt::Display) -> CliError {
    CliError::usage(format!("{flag}: {err}"))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Reads a tensor; symmetric when requested or flagged in the file.
fn load_tensor(path: Option<&Path>, sym: bool) -> CliResult<(DenseTensor, bool)> {
    let name = source_name(path);
    let file = parse_tns(&read_input(path)?).map_err(|e| CliError::from_input(&name, e))?;
    let symmetric = sym || file.symmetric;
    if symmetric {
        let t = file
            .into_sym(&Tolerances::default())
            .map_err(|e| CliError::from_input(&name, e))?;
        return Ok((t.into_dense(), true));
    }
    let shape = file.tensor.shape();
    if shape.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::input(format!(
            "{name}: dimensions {shape:?} must be nondecreasing"
        )));
    }
    Ok((file.tensor, false))
}

fn config_from(opt: &OptArgs) -> CliResult<OptimizerConfig> {
    let config = OptimizerConfig {
        max_iters: opt.max_iter,
        grad_tol: opt.tol,
        starts: opt.starts,
        seed: opt.seed,
        ..OptimizerConfig::default()
    };
    config
        .validate()
        .map_err(|e| usage_err("--starts/--max-iter/--tol", e))?;
    Ok(config)
}

fn echo_config(report: &mut Report, config: &OptimizerConfig) {
    report
        .config("seed", config.seed)
        .config("starts", config.starts)
        .config("max_iter", config.max_iters)
        .config("tol", num(config.grad_tol));
}

fn run_decompose(
    input: Option<&Path>,
    opt: &OptArgs,
    sym: bool,
    odeco: bool,
    core_out: Option<&Path>,
    factors_out: Option<&Path>,
) -> CliResult<Outcome> {
    let config = config_from(opt)?;
    let (t, symmetric) = load_tensor(input, sym)?;
    let name = source_name(input);
    let dec = if odeco {
        decompose_odeco(&t, symmetric, &config)
    } else if symmetric {
        let s = orthotensor::SymTensor::new(t.clone(), &Tolerances::default()).map_err(|e| CliError::from_input(&name, e))?;
        decompose_sym(&s, &config)
    } else {
        decompose(&t, &config)
    }
    .map_err(|e| CliError::from_input(&name, e))?;

    let mut report = Report::new("decompose");
    report.config("input", &name);
    echo_config(&mut report, &config);
    report
        .config("symmetric", symmetric)
        .config("odeco", odeco)
        .result("shape", shape_str(t.shape()))
        .result("relative_distance", num(dec.residual))
        .result("singular_values", list(&dec.singular_values))
        .result("best_start", dec.best_start)
        .result("iterations", dec.iterations)
        .result("converged", dec.converged)
        .result("non_generic", dec.non_generic);
    let vectors = dec
        .tuples
        .iter()
        .enumerate()
        .flat_map(|(j, tuple)| {
            tuple
                .iter()
                .enumerate()
                .map(move |(k, v)| format!("tuple {} mode {}: {}", j + 1, k + 1, list(v.as_slice())))
        })
        .collect();
    report.block("vectors", vectors);
    for w in dec.warnings() {
        report.warn(w);
    }
    if let Some(p) = core_out {
        write_file(p, &format_tns(&dec.core, symmetric))?;
    }
    if let Some(prefix) = factors_out {
        for (k, m) in dec.q.matrices().iter().enumerate() {
            let t = DenseTensor::new(vec![m.nrows(), m.ncols()], row_major(m)).map_err(|e| CliError::usage(e.to_string()))?;
            let path = PathBuf::from(format!("{}.{}.tns", prefix.display(), k + 1));
            write_file(&path, &format_tns(&t, false))?;
        }
    }
    Ok((report, None))
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows()).flat_map(|r| (0..m.ncols()).map(move |c| m[(r, c)])).collect()
}

fn shape_str(shape: &[usize]) -> String {
    shape.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

fn run_distance(input: Option<&Path>, opt: &OptArgs, sym: bool, odeco: bool) -> CliResult<Outcome> {
    let config = config_from(opt)?;
    let (t, symmetric) = load_tensor(input, sym)?;
    let name = source_name(input);
    let mut report = Report::new("distance");
    report.config("input", &name);
    echo_config(&mut report, &config);
    report
        .config("symmetric", symmetric)
        .config("odeco", odeco)
        .result("shape", shape_str(t.shape()));
    if odeco {
        let spec = ObjectiveSpec::odeco(t, symmetric).map_err(|e| CliError::from_input(&name, e))?;
        let res = minimize(&spec, &config).map_err(|e| CliError::from_input(&name, e))?;
        report
            .result("relative_distance", num(res.relative_distance))
            .result("best_start", res.best_start)
            .result("converged", res.converged);
    } else {
        let cmp = compare_with_odeco(&t, symmetric, &config).map_err(|e| CliError::from_input(&name, e))?;
        report
            .result("relative_distance", num(cmp.structured.relative_distance))
            .result("odeco_relative_distance", num(cmp.odeco.relative_distance))
            .result("best_start", cmp.structured.best_start)
            .result("converged", cmp.structured.converged);
    }
    Ok((report, None))
}

fn run_cumulant(order: usize, csv: &Path, tensor_out: Option<&Path>) -> CliResult<Outcome> {
    if !(2..=4).contains(&order) {
        return Err(usage_err("--order", format!("must be 2, 3 or 4, got {order}")));
    }
    let name = csv.display().to_string();
    let sample = read_csv_file(csv).map_err(|e| CliError::from_input(&name, e))?;
    let k = cumulant_tensor(&sample, order).map_err(|e| CliError::from_input(&name, e))?;
    let text = format_tns(k.as_dense(), true);
    let mut report = Report::new("cumulant");
    report
        .config("csv", &name)
        .config("order", order)
        .result("observations", sample.observations())
        .result("variables", sample.variables())
        .result("norm", num(k.as_dense().norm()));
    match tensor_out {
        Some(p) => {
            write_file(p, &text)?;
            report.result("tensor", p.display());
            Ok((report, None))
        }
        None => Ok((report, Some(text))),
    }
}

fn parse_vector(s: &str) -> Result<DVector<f64>, String> {
    let values = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<f64>().map_err(|_| format!("invalid number {x:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("empty vector".into());
    }
    Ok(DVector::from_vec(values))
}

fn run_verify(input: &Path, inline: Option<&str>, file: Option<&Path>) -> CliResult<Outcome> {
    let name = input.display().to_string();
    let (t, _) = load_tensor_any(input)?;
    let vectors: Vec<DVector<f64>> = match (inline, file) {
        (Some(s), _) => s
            .split(';')
            .enumerate()
            .map(|(k, v)| parse_vector(v).map_err(|e| usage_err("--vectors", format!("vector {}: {e}", k + 1))))
            .collect::<CliResult<_>>()?,
        (None, Some(p)) => {
            let vname = p.display().to_string();
            let text = std::fs::read_to_string(p).map_err(|e| CliError::input(format!("{vname}: {e}")))?;
            text.lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| parse_vector(l).map_err(|e| CliError::input(format!("{vname}: line {}: {e}", i + 1))))
                .collect::<CliResult<_>>()?
        }
        (None, None) => return Err(CliError::usage("one of --vectors or --vectors-file is required")),
    };
    if vectors.len() != t.order() {
        return Err(usage_err(
            "--vectors",
            format!("{} vectors given for an order-{} tensor", vectors.len(), t.order()),
        ));
    }
    for (k, (v, &n)) in vectors.iter().zip(t.shape()).enumerate() {
        if v.len() != n {
            return Err(usage_err("--vectors", format!("vector {} has length {}, mode {} has size {n}", k + 1, v.len(), k + 1)));
        }
    }
    let r = svt_residual(&t, &vectors).map_err(|e| usage_err("--vectors", e))?;
    let mut report = Report::new("verify");
    report
        .config("input", &name)
        .result("shape", shape_str(t.shape()))
        .result("value", num(r.value))
        .result("residual", num(r.residual));
    if r.normalized {
        report.warn("vectors rescaled to unit norm");
    }
    Ok((report, None))
}

/// Reads a tensor without the ordering requirement on dimensions.
fn load_tensor_any(path: &Path) -> CliResult<(DenseTensor, bool)> {
    let name = path.display().to_string();
    let file = parse_tns(&read_input(Some(path))?).map_err(|e| CliError::from_input(&name, e))?;
    Ok((file.tensor, file.symmetric))
}

fn run_mq(q: &[String], swaps: Option<&str>) -> CliResult<Outcome> {
    let mats: Vec<DMatrix<f64>> = match swaps {
        Some(bits) => bits
            .chars()
            .map(|c| match c {
                '0' => Ok(DMatrix::identity(2, 2)),
                '1' => Ok(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])),
                other => Err(usage_err("--swaps", format!("unexpected character {other:?}"))),
            })
            .collect::<CliResult<_>>()?,
        None => q
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let v = parse_vector(s).map_err(|e| usage_err("--q", format!("factor {}: {e}", k + 1)))?;
                if v.len() != 4 {
                    return Err(usage_err("--q", format!("factor {} needs 4 entries, got {}", k + 1, v.len())));
                }
                Ok(DMatrix::from_row_slice(2, 2, v.as_slice()))
            })
            .collect::<CliResult<_>>()?,
    };
    if mats.len() < 3 {
        return Err(usage_err("--q/--swaps", format!("need at least 3 factors, got {}", mats.len())));
    }
    let m = build_mq(&mats).map_err(|e| usage_err("--q", e))?;
    let mut report = Report::new("mq");
    report
        .config("order", mats.len())
        .result("rows", m.matrix.nrows())
        .result("cols", m.matrix.ncols())
        .result("rank", m.rank());
    if let Ok(pattern) = i_q(&mats) {
        report.result("i_q", render_bits(&pattern));
    }
    report.result("row_labels", m.row_labels().join(","));
    report.result("col_labels", m.col_labels().join(","));
    let lines = (0..m.matrix.nrows())
        .map(|r| {
            (0..m.matrix.ncols())
                .map(|c| format!("{}", m.matrix[(r, c)]))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    report.block("matrix", lines);
    Ok((report, None))
}

fn run_member2d(d: usize, t: &str, exact: bool, budget: usize) -> CliResult<Outcome> {
    if d < 3 {
        return Err(usage_err("--d", format!("order must be at least 3, got {d}")));
    }
    let fields: Vec<&str> = t.split(',').map(str::trim).collect();
    if fields.len() != d + 1 {
        return Err(usage_err("--t", format!("expected {} coordinates, found {}", d + 1, fields.len())));
    }
    let mut report = Report::new("member2d");
    report.config("d", d).config("exact", exact);
    if exact {
        let values = fields
            .iter()
            .enumerate()
            .map(|(k, f)| parse_rational(f).map_err(|e| usage_err("--t", format!("t_{k}: {e}"))))
            .collect::<CliResult<Vec<BigRational>>>()?;
        let m = membership_value(&values, budget).map_err(|e| match e {
            Error::BudgetExhausted(_) => usage_err("--budget", e),
            other => usage_err("--t", other),
        })?;
        let on = num::Zero::is_zero(&m.value) && !m.special_locus;
        report
            .result("r", &m.value)
            .result("resultant", &m.resultant)
            .result("denominator", &m.denominator)
            .result("verdict", if on { "on variety" } else { "off variety" });
        flag_membership(&mut report, m.zero_polynomial, m.special_locus);
    } else {
        let values = fields
            .iter()
            .enumerate()
            .map(|(k, f)| f.parse::<f64>().map_err(|_| usage_err("--t", format!("t_{k}: invalid number {f:?}"))))
            .collect::<CliResult<Vec<f64>>>()?;
        let coords = BinarySymCoords::new(values).map_err(|e| usage_err("--t", e))?;
        let m = membership_float(&coords).map_err(|e| usage_err("--t", e))?;
        report
            .result("r", num(m.raw.value))
            .result("normalized", num(m.normalized))
            .result("verdict", if m.member && !m.raw.special_locus { "on variety" } else { "off variety" });
        flag_membership(&mut report, m.raw.zero_polynomial, m.raw.special_locus);
    }
    Ok((report, None))
}

fn flag_membership(report: &mut Report, zero: bool, special: bool) {
    if zero {
        report.warn("F vanishes identically");
    }
    if special {
        report.warn("F(i)F(-i) = 0 with nonzero resultant");
    }
}

fn run_pattern(shape: &[usize], sym: bool, odeco: bool) -> CliResult<Outcome> {
    if shape.windows(2).any(|w| w[0] > w[1]) {
        return Err(usage_err("--shape", format!("dimensions {shape:?} must be nondecreasing")));
    }
    let pattern = if odeco {
        pattern_vdiag(shape)
    } else if sym {
        if shape.iter().any(|&n| n != shape[0]) {
            return Err(usage_err("--shape", "symmetric patterns need equal dimensions"));
        }
        pattern_vsym(shape[0], shape.len())
    } else {
        pattern_v(shape)
    }
    .map_err(|e| usage_err("--shape", e))?;
    let mut report = Report::new("pattern");
    report
        .config("shape", shape_str(shape))
        .result("kind", pattern.kind())
        .result("forced", pattern.forced_count())
        .result("dim", pattern.dim());
    report.block("indices", pattern.render_one_based());
    Ok((report, None))
}

fn run_gen(shape: &[usize], seed: u64, sym: bool, tensor_out: Option<&Path>, core_out: Option<&Path>) -> CliResult<Outcome> {
    if shape.len() < 2 || shape.windows(2).any(|w| w[0] > w[1]) {
        return Err(usage_err("--shape", format!("need at least two nondecreasing dimensions, got {shape:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = sample_instance(shape, sym, &mut rng).map_err(|e| usage_err("--shape", e))?;
    let text = format_tns(&inst.tensor, sym);
    if let Some(p) = core_out {
        write_file(p, &format_tns(&inst.core, sym))?;
    }
    let mut report = Report::new("gen");
    report
        .config("shape", shape_str(shape))
        .config("seed", seed)
        .config("symmetric", sym)
        .result("diagonal", list(&inst.diagonal()));
    match tensor_out {
        Some(p) => {
            write_file(p, &text)?;
            report.result("tensor", p.display());
            Ok((report, None))
        }
        None => Ok((report, Some(text))),
    }
}

fn run_dim_check(shape: &[usize], sym: bool, seed: u64) -> CliResult<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = orthotensor::variety::dim_check(shape, sym, &mut rng).map_err(|e| usage_err("--shape", e))?;
    let mut report = Report::new("dim-check");
    report
        .config("shape", shape_str(shape))
        .config("symmetric", sym)
        .config("seed", seed)
        .result("ambient", r.ambient)
        .result("expected", r.expected)
        .result("measured", r.measured)
        .result("match", r.expected == r.measured);
    Ok((report, None))
}

fn run_codim_table(d: Option<usize>) -> CliResult<Outcome> {
    let orders: Vec<usize> = match d {
        Some(d) if (4..=8).contains(&d) => vec![d],
        Some(d) => return Err(usage_err("--d", format!("must lie in 4..=8, got {d}"))),
        None => (4..=8).collect(),
    };
    let mut report = Report::new("codim-table");
    let mut all = true;
    for d in orders {
        let table = codim_table_check(d).map_err(|e| usage_err("--d", e))?;
        all &= table.all_match();
        let mut lines: Vec<String> = table
            .by_weight()
            .into_iter()
            .map(|(w, expected, measured)| {
                let seen: Vec<String> = measured.iter().map(usize::to_string).collect();
                format!("|i(Q)|={w} expected={expected} measured={}", seen.join("/"))
            })
            .collect();
        let sym: Vec<String> = table.symmetric.iter().map(|r| r.measured.to_string()).collect();
        lines.push(format!(
            "hadamard-type reduced rank expected={} measured={}",
            table.symmetric.first().map_or(0, |r| r.expected),
            sym.join("/")
        ));
        report.block(&format!("order{d}"), lines);
    }
    report.result("all_match", all);
    Ok((report, None))
}
