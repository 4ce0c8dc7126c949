use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use qbath_core::bath_sim::{self, BathSpec, McConfig, Method, TailEstimate, TailMethod};
use qbath_core::closed_forms::{dirac2, dirac2_of_energy, haar2, TwoLevel, TwoLevelState};
use qbath_core::thermo::{self, ScanFailure};
use qbath_core::{
    completeness_check, dirac_law, haar_law, sample_haar_energy, Atom, DiscreteLaw, EnergyLaw,
    EquationOfState, ErrorKind, Grid, RngStream, Spectrum, ThermoPoint,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{csv_num, document, emit, num, Meta, Table};
use crate::plot;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qbath_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Invalid => 2,
                ErrorKind::Domain => 3,
                ErrorKind::Resource => 4,
            },
            CliError::Io { .. } => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn write_out(path: Option<&Path>, content: &str) -> Result<()> {
    emit(path, content).map_err(|source| CliError::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    })
}

struct LoadedLaw {
    law: EnergyLaw,
    name: &'static str,
    spectrum: Spectrum,
    /// Set for two nondegenerate levels of multiplicity one, where the
    /// closed forms apply.
    two_level: Option<TwoLevel>,
}

fn load_law(args: &LawArgs) -> Result<LoadedLaw> {
    match args.law {
        LawKind::Dirac | LawKind::Haar => {
            let text = args
                .levels
                .as_deref()
                .ok_or_else(|| usage("--levels is required for the dirac and haar laws"))?;
            let spectrum: Spectrum = text.parse()?;
            let two_level = match spectrum.levels() {
                [a, b] if a.multiplicity == 1 && b.multiplicity == 1 => {
                    Some(TwoLevel::new(a.energy, b.energy)?)
                }
                _ => None,
            };
            let (law, name) = if args.law == LawKind::Dirac {
                (dirac_law(&spectrum), "dirac")
            } else {
                (haar_law(&spectrum), "haar")
            };
            Ok(LoadedLaw {
                law,
                name,
                spectrum,
                two_level,
            })
        }
        LawKind::Custom => {
            let path = args
                .atoms
                .as_deref()
                .ok_or_else(|| usage("--atoms FILE is required for --law custom"))?;
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let atoms: Vec<Atom> = serde_json::from_str(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let law = DiscreteLaw::new(atoms)?;
            let spectrum = Spectrum::from_energies(law.energies())?;
            Ok(LoadedLaw {
                law: law.into(),
                name: "custom",
                spectrum,
                two_level: None,
            })
        }
    }
}

impl LoadedLaw {
    fn meta(&self, command: &'static str) -> Meta {
        Meta {
            law: Some(self.name.into()),
            spectrum: Some(self.spectrum.to_string()),
            ..Meta::new(command)
        }
    }

    fn closed_form(&self, beta: f64) -> Option<qbath_core::Result<TwoLevelState>> {
        let tl = self.two_level.as_ref()?;
        Some(match self.name {
            "dirac" => dirac2(tl, beta),
            "haar" => haar2(tl, beta),
            _ => return None,
        })
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| usage(format!("bad {what} entry `{}`", s.trim())))
        })
        .collect()
}

/// `start:stop:count` (both ends included) or a comma list.
pub fn parse_grid(text: &str, scale: GridScale) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 1 {
        return parse_list(text, "grid");
    }
    let [start, stop, count] = parts[..] else {
        return Err(usage(format!("grid `{text}` is not start:stop:count")));
    };
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("bad grid bound `{s}`")))
    };
    let (start, stop) = (parse(start)?, parse(stop)?);
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad grid count `{count}`")))?;
    if count == 0 {
        return Err(usage("grid count must be at least 1"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let steps = (count - 1) as f64;
    let values = match scale {
        GridScale::Linear => (0..count)
            .map(|i| start + (stop - start) * i as f64 / steps)
            .collect(),
        GridScale::Log => {
            if !(start > 0.0 && stop > 0.0) {
                return Err(usage("a log grid needs positive bounds"));
            }
            let (a, b) = (start.ln(), stop.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / steps).exp())
                .collect::<Vec<f64>>()
        }
    };
    let mut values: Vec<f64> = values;
    values[0] = start;
    values[count - 1] = stop;
    Ok(values)
}

fn point_from_closed_form(s: &TwoLevelState, beta: f64, k_b: f64) -> ThermoPoint {
    ThermoPoint {
        beta,
        log_z: s.log_z,
        energy: s.energy,
        entropy: k_b * s.entropy,
        heat_capacity: k_b * s.heat_capacity,
        temperature: if beta == 0.0 { f64::INFINITY } else { 1.0 / (k_b * beta) },
    }
}

fn scan(loaded: &LoadedLaw, grid: &Grid, k_b: f64) -> Result<EquationOfState> {
    let Grid::Beta(betas) = grid else {
        return Ok(thermo::eos_scan(&loaded.law, grid, k_b)?);
    };
    if loaded.closed_form(0.0).is_none() || betas.is_empty() || !(k_b > 0.0 && k_b.is_finite()) {
        return Ok(thermo::eos_scan(&loaded.law, grid, k_b)?);
    }
    let mut eos = EquationOfState {
        law: loaded.law.to_string(),
        k_b,
        points: Vec::with_capacity(betas.len()),
        failures: Vec::new(),
    };
    for (index, &beta) in betas.iter().enumerate() {
        match loaded.closed_form(beta).expect("two-level law") {
            Ok(s) => eos.points.push(point_from_closed_form(&s, beta, k_b)),
            Err(error) => eos.failures.push(ScanFailure {
                index,
                value: beta,
                error,
            }),
        }
    }
    Ok(eos)
}

fn eos(args: &EosArgs) -> Result<i32> {
    let loaded = load_law(&args.law)?;
    let grid = match (&args.beta, &args.energy_grid) {
        (Some(b), None) => Grid::Beta(parse_grid(b, args.grid_scale)?),
        (None, Some(e)) => Grid::Energy(parse_grid(e, args.grid_scale)?),
        _ => return Err(usage("give exactly one of --beta and --energy-grid")),
    };
    let eos = scan(&loaded, &grid, args.kb)?;
    let content = match args.out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = Table::new(&["beta", "logZ", "energy", "entropy", "heat_capacity", "temperature"]);
            for p in &eos.points {
                t.push(
                    [p.beta, p.log_z, p.energy, p.entropy, p.heat_capacity, p.temperature]
                        .map(csv_num)
                        .to_vec(),
                );
            }
            t.to_csv()
        }
        Format::Json => {
            let mut meta = loaded.meta("eos");
            meta.k_b = Some(args.kb);
            meta.extra.insert(
                "grid".into(),
                json!(if matches!(grid, Grid::Beta(_)) { "beta" } else { "energy" }),
            );
            let points: Vec<Value> = eos
                .points
                .iter()
                .map(|p| {
                    json!({
                        "beta": num(p.beta),
                        "logZ": num(p.log_z),
                        "energy": num(p.energy),
                        "entropy": num(p.entropy),
                        "heat_capacity": num(p.heat_capacity),
                        "temperature": num(p.temperature),
                    })
                })
                .collect();
            document(&meta, json!({ "points": points, "failures": failures_json(&eos.failures) }))
        }
    };
    write_out(args.out.output.as_deref(), &content)?;
    report_failures(&eos.failures);
    Ok(if eos.failures.is_empty() { 0 } else { 3 })
}

fn failures_json(failures: &[ScanFailure]) -> Value {
    failures
        .iter()
        .map(|f| json!({ "index": f.index, "value": num(f.value), "error": f.error.to_string() }))
        .collect()
}

fn report_failures(failures: &[ScanFailure]) {
    for f in failures {
        eprintln!("qbath: grid entry {} ({}): {}", f.index, f.value, f.error);
    }
}

fn invert(args: &InvertArgs) -> Result<i32> {
    let loaded = load_law(&args.law)?;
    if !(args.kb > 0.0 && args.kb.is_finite()) {
        return Err(usage(format!("--kb must be positive, got {}", args.kb)));
    }
    let e = args.energy;
    let (beta, log_z, entropy) = match (&loaded.two_level, loaded.name) {
        (Some(tl), "dirac") => {
            let inv = dirac2_of_energy(tl, e).map_err(|_| domain_error(&loaded.law, e))?;
            (inv.beta, inv.log_z, args.kb * inv.entropy)
        }
        _ => {
            let p = thermo::thermo_point_at_energy(&loaded.law, e, args.kb)?;
            (p.beta, p.log_z, p.entropy)
        }
    };
    let temperature = if beta == 0.0 { f64::INFINITY } else { 1.0 / (args.kb * beta) };
    let content = match args.out.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let mut t = Table::new(&["energy", "beta", "logZ", "entropy", "temperature"]);
            t.push([e, beta, log_z, entropy, temperature].map(csv_num).to_vec());
            t.to_csv()
        }
        Format::Json => {
            let mut meta = loaded.meta("invert");
            meta.k_b = Some(args.kb);
            document(
                &meta,
                json!({
                    "energy": num(e),
                    "beta": num(beta),
                    "logZ": num(log_z),
                    "entropy": num(entropy),
                    "temperature": num(temperature),
                }),
            )
        }
    };
    write_out(args.out.output.as_deref(), &content)?;
    Ok(0)
}

/// The generic solver's error for `energy`, so both paths report alike.
fn domain_error(law: &EnergyLaw, energy: f64) -> CliError {
    match thermo::invert_beta(law, energy) {
        Err(e) => e.into(),
        Ok(_) => usage(format!("energy {energy} rejected")),
    }
}

fn require_seed(mc: &McArgs) -> Result<McConfig> {
    let seed = mc
        .seed
        .ok_or_else(|| usage("Monte Carlo needs --seed (or QBATH_SEED)"))?;
    if mc.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    Ok(McConfig {
        samples: mc.samples,
        stream: RngStream::new(seed, 0),
    })
}

fn sample(args: &SampleArgs) -> Result<i32> {
    let spectrum: Spectrum = args.levels.parse()?;
    let mc = require_seed(&args.mc)?;
    let count = usize::try_from(mc.samples).map_err(|_| usage("--samples too large"))?;
    let draws = sample_haar_energy(&spectrum, mc.stream, count);
    let content = match args.out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = Table::new(&["energy"]);
            for &e in &draws {
                t.push(vec![csv_num(e)]);
            }
            t.to_csv()
        }
        Format::Json => {
            let meta = Meta {
                law: Some("haar".into()),
                spectrum: Some(spectrum.to_string()),
                seed: args.mc.seed,
                extra: [("samples".to_string(), json!(mc.samples))].into_iter().collect(),
                ..Meta::new("sample")
            };
            document(&meta, json!({ "energies": draws.iter().map(|&e| num(e)).collect::<Vec<_>>() }))
        }
    };
    write_out(args.out.output.as_deref(), &content)?;
    Ok(0)
}

fn method(m: MethodArg) -> Method {
    match m {
        MethodArg::Auto => Method::Auto,
        MethodArg::Exact => Method::Exact,
        MethodArg::Mc => Method::Mc,
        MethodArg::Tilted => Method::Tilted,
    }
}

/// Resolves the method and fetches the Monte Carlo settings it needs.
fn plan(spec: &BathSpec, energy: f64, args: &TailArgs) -> Result<(TailMethod, Option<McConfig>)> {
    let resolved = bath_sim::resolve_method(spec, energy, method(args.method))?;
    let mc = if resolved.is_exact() {
        None
    } else {
        Some(require_seed(&args.mc)?)
    };
    Ok((resolved, mc))
}

fn concrete(m: TailMethod) -> Method {
    match m {
        TailMethod::ExactDp | TailMethod::IrwinHall => Method::Exact,
        TailMethod::McNaive => Method::Mc,
        TailMethod::McTilted => Method::Tilted,
    }
}

fn estimate_json(t: &TailEstimate) -> Value {
    let mut v = json!({
        "value": num(t.value),
        "std_error": num(t.std_error),
        "method": t.method.name(),
        "event": t.event,
        "n": t.n,
        "zero_hits": t.zero_hits,
    });
    if let (Some(samples), Some(hits)) = (t.samples, t.hits) {
        v["samples"] = json!(samples);
        v["hits"] = json!(hits);
    }
    v
}

fn write_estimate(
    loaded: &LoadedLaw,
    command: &'static str,
    args: &TailArgs,
    t: &TailEstimate,
) -> Result<()> {
    let content = match args.out.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let mut table = Table::new(&["n", "value", "std_error", "method", "samples", "hits"]);
            table.push(vec![
                t.n.to_string(),
                csv_num(t.value),
                csv_num(t.std_error),
                t.method.name().into(),
                t.samples.map_or_else(String::new, |s| s.to_string()),
                t.hits.map_or_else(String::new, |h| h.to_string()),
            ]);
            table.to_csv()
        }
        Format::Json => {
            let mut meta = loaded.meta(command);
            meta.method = Some(t.method.name().into());
            meta.seed = if t.method.is_exact() { None } else { args.mc.seed };
            document(&meta, estimate_json(t))
        }
    };
    if t.zero_hits {
        eprintln!("qbath: no Monte Carlo sample hit the event; the estimate is -inf");
    }
    write_out(args.out.output.as_deref(), &content)
}

fn tail(args: &TailArgs) -> Result<i32> {
    let loaded = load_law(&args.law)?;
    let spec = BathSpec::new(loaded.law.clone(), args.n)?;
    let (resolved, mc) = plan(&spec, args.energy, args)?;
    let t = bath_sim::tail(&spec, args.energy, concrete(resolved), mc)?;
    write_estimate(&loaded, "tail", args, &t)?;
    Ok(0)
}

fn shell(args: &ShellArgs) -> Result<i32> {
    let a = &args.tail;
    let loaded = load_law(&a.law)?;
    let spec = BathSpec::new(loaded.law.clone(), a.n)?;
    let (resolved, mc) = plan(&spec, a.energy, a)?;
    let t = bath_sim::shell_entropy(&spec, a.energy, args.delta, concrete(resolved), mc)?;
    write_estimate(&loaded, "shell", a, &t)?;
    Ok(0)
}

fn converge(args: &ConvergeArgs) -> Result<i32> {
    let loaded = load_law(&args.law)?;
    if !(args.kb > 0.0 && args.kb.is_finite()) {
        return Err(usage(format!("--kb must be positive, got {}", args.kb)));
    }
    let n_list: Vec<usize> = parse_list(&args.n_list, "--n-list")?;
    let mut needs_mc = false;
    for &n in &n_list {
        let spec = BathSpec::new(loaded.law.clone(), n)?;
        needs_mc |= !bath_sim::resolve_method(&spec, args.energy, method(args.method))?.is_exact();
    }
    let mc = if needs_mc { Some(require_seed(&args.mc)?) } else { None };
    let rows = bath_sim::convergence_study(&loaded.law, args.energy, &n_list, method(args.method), mc)?;
    let k = args.kb;
    let content = match args.out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = Table::new(&["n", "entropy", "bound", "gap", "std_error", "method"]);
            for r in &rows {
                t.push(vec![
                    r.n.to_string(),
                    csv_num(k * r.entropy),
                    csv_num(k * r.bound),
                    csv_num(k * r.gap),
                    csv_num(k * r.std_error),
                    r.method.name().into(),
                ]);
            }
            t.to_csv()
        }
        Format::Json => {
            let mut meta = loaded.meta("converge");
            meta.k_b = Some(k);
            meta.seed = mc.and(args.mc.seed);
            meta.extra.insert("energy".into(), num(args.energy));
            let data: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "entropy": num(k * r.entropy),
                        "bound": num(k * r.bound),
                        "gap": num(k * r.gap),
                        "std_error": num(k * r.std_error),
                        "method": r.method.name(),
                    })
                })
                .collect();
            document(&meta, Value::Array(data))
        }
    };
    write_out(args.out.output.as_deref(), &content)?;
    Ok(0)
}

fn check(args: &CheckArgs) -> Result<i32> {
    let loaded = load_law(&args.law)?;
    let eps: Vec<f64> = match &args.eps {
        Some(text) => parse_list(text, "--eps")?,
        None => Vec::new(),
    };
    let report = completeness_check(&loaded.spectrum, &loaded.law, &eps)?;
    let content = match args.out.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let mut t = Table::new(&["epsilon", "probability"]);
            for w in &report.witnesses {
                t.push(vec![csv_num(w.epsilon), csv_num(w.probability)]);
            }
            t.to_csv()
        }
        Format::Json => {
            let witnesses: Vec<Value> = report
                .witnesses
                .iter()
                .map(|w| json!({ "epsilon": num(w.epsilon), "probability": num(w.probability) }))
                .collect();
            document(
                &loaded.meta("check"),
                json!({ "complete": report.complete, "witnesses": witnesses }),
            )
        }
    };
    write_out(args.out.output.as_deref(), &content)?;
    Ok(0)
}

fn plot_cmd(args: &PlotArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.input).map_err(|source| CliError::Io {
        path: args.input.clone(),
        source,
    })?;
    let columns: Vec<String> = args.columns.split(',').map(|c| c.trim().to_string()).collect();
    let series = plot::read_columns(&text, &args.x, &columns).map_err(usage)?;
    write_out(args.output.as_deref(), &plot::render(&series, &args.x))?;
    Ok(0)
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Eos(a) => eos(a),
        Command::Invert(a) => invert(a),
        Command::Sample(a) => sample(a),
        Command::Tail(a) => tail(a),
        Command::Shell(a) => shell(a),
        Command::Converge(a) => converge(a),
        Command::Check(a) => check(a),
        Command::Plot(a) => plot_cmd(a),
    }
}
