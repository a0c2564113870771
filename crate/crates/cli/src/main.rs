use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use idcert::cert::CertReport;
use idcert::gamma::{self, CatalogEntry, GammaEstimate, GammaOptions};
use idcert::id::{find_ids_in_group, IdFile, IdFilter, IdTable};
use idcert::measure::{
    all_settings, auto_select_id, certification_report, expectation_plot_csv, fidelity_plot_csv,
    linear_inversion_tomography, plan_settings, poisson_mc, simulate_experiment, CountsSource, ErrorModel,
    ExactDataset, ExpectationSource, ExperimentDataset, MeasureError, ReportOptions, DEFAULT_MC_CYCLES,
};
use idcert::pauli::PauliOperator;
use idcert::stabilizer::{graph_group, state_stabilizer, GroupFile, StabilizerGroup};
use idcert::state::{QuantumState, StateSpec};

/// Identity-product analysis and certification of multiqubit states.
///
/// Exit codes: 0 success, 2 invalid input, 3 empty result, 4 the data do not
/// cover what was asked.
#[derive(Parser)]
#[command(name = "idcert", version)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the machine-readable result here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the IDs inside a stabilizer group.
    FindIds {
        /// State spec, generator list (JSON array) or a shorthand such as `ghz:4`.
        input: String,
        #[arg(long, default_value_t = 5)]
        max_m: usize,
        /// Keep only IDs with exactly this many rows.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        whole: bool,
        #[arg(long)]
        negative: bool,
        #[arg(long)]
        entangled: bool,
        #[arg(long)]
        critical: bool,
        /// Keep only IDs acting on every qubit.
        #[arg(long)]
        full_support: bool,
        /// Print only the count.
        #[arg(long)]
        count: bool,
    },
    /// Bell parameter, fidelity bounds and witnesses from measured data.
    Certify {
        /// Counts dataset (JSON or CSV) or expectation table (JSON).
        dataset: PathBuf,
        /// Target state, needed for the stabilizer-group and tomography fidelities.
        #[arg(long)]
        state: Option<String>,
        /// ID file, or `auto` to pick one from the target's stabilizer group.
        #[arg(long, default_value = "auto")]
        id: String,
        #[arg(long, value_enum, default_value_t = Errors::Poisson)]
        errors: Errors,
        #[arg(long, default_value_t = DEFAULT_MC_CYCLES)]
        cycles: usize,
        /// Numeric γ table written by `idcert gamma --out`.
        #[arg(long)]
        gammas: Option<PathBuf>,
        /// Directory for plot-data CSV files.
        #[arg(long)]
        plots: Option<PathBuf>,
    },
    /// Numerical γ bounds of an ID over classes of states.
    Gamma {
        id: PathBuf,
        /// JSON list of `{"label": ..., "seed": <state spec>}`; the built-in
        /// four-qubit catalog when absent.
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long, default_value_t = gamma::DEFAULT_STARTS)]
        starts: usize,
    },
    /// Synthetic counts from a depolarized state.
    Simulate {
        state: String,
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        /// `auto` (minimal plan for the ID), `full` (all 3^N) or a JSON list of settings.
        #[arg(long, default_value = "auto")]
        settings: String,
        /// ID to plan for; chosen from the state's group when absent.
        #[arg(long)]
        id: Option<PathBuf>,
        /// Add every setting needed for tomography.
        #[arg(long)]
        full_tomo: bool,
    },
    /// Linear-inversion tomography of a complete counts dataset.
    Tomo {
        dataset: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = DEFAULT_MC_CYCLES)]
        cycles: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Errors {
    Poisson,
    Binomial,
}

enum Outcome {
    Done,
    Empty,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Empty) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_coverage_gap(&e) {
                ExitCode::from(4)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn is_coverage_gap(e: &anyhow::Error) -> bool {
    e.chain().any(|c| match c.downcast_ref::<MeasureError>() {
        Some(m) => m.is_coverage_gap(),
        None => matches!(c.downcast_ref::<idcert::Error>(), Some(idcert::Error::Measure(m)) if m.is_coverage_gap()),
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::FindIds { input, max_m, m, whole, negative, entangled, critical, full_support, count } => {
            let filter = IdFilter {
                whole: *whole,
                negative: *negative,
                entangled: *entangled,
                critical: *critical,
                full_support: *full_support,
                rows: *m,
            };
            find_ids(cli, input, *max_m, filter, *count)
        }
        Command::Certify { dataset, state, id, errors, cycles, gammas, plots } => {
            let model = match errors {
                Errors::Poisson => ErrorModel::PoissonMc { cycles: *cycles, seed: cli.seed },
                Errors::Binomial => ErrorModel::Binomial,
            };
            certify(cli, dataset, state.as_deref(), id, model, gammas.as_deref(), plots.as_deref())
        }
        Command::Gamma { id, catalog, starts } => gamma_cmd(cli, id, catalog.as_deref(), *starts),
        Command::Simulate { state, p, shots, settings, id, full_tomo } => {
            simulate(cli, state, *p, *shots, settings, id.as_deref(), *full_tomo)
        }
        Command::Tomo { dataset, state, cycles } => tomo(cli, dataset, state, *cycles),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(cli: &Cli, text: &str) -> Result<()> {
    if let Some(path) = &cli.out {
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

/// A file path, or `name` / `name:n` for the built-in states.
fn state_spec(arg: &str) -> Result<StateSpec> {
    let path = Path::new(arg);
    if path.exists() {
        return serde_json::from_str(&read(path)?).with_context(|| format!("{arg} is not a state spec"));
    }
    let (name, n) = match arg.split_once(':') {
        Some((name, n)) => (name, Some(n.parse::<usize>().with_context(|| format!("bad qubit count in {arg:?}"))?)),
        None => (arg, None),
    };
    Ok(StateSpec::Named { name: name.to_string(), n, pairs: None, bits: None })
}

fn load_state(arg: &str) -> Result<(QuantumState, String)> {
    let spec = state_spec(arg)?;
    Ok((spec.build()?, spec.label()))
}

fn load_group(arg: &str) -> Result<StabilizerGroup> {
    let path = Path::new(arg);
    if path.exists() {
        let value: Value = serde_json::from_str(&read(path)?).with_context(|| format!("{arg} is not JSON"))?;
        if value.is_array() {
            let gens: GroupFile = serde_json::from_value(value).context("generator list")?;
            return Ok(StabilizerGroup::from_generators(&gens.0)?);
        }
    }
    match state_spec(arg)? {
        StateSpec::Graph { graph } => Ok(graph_group(&graph)?),
        spec => Ok(state_stabilizer(&spec.build()?)?),
    }
}

fn load_id(path: &Path) -> Result<(IdTable, Vec<i8>)> {
    let file: IdFile = serde_json::from_str(&read(path)?).with_context(|| format!("{} is not an ID file", path.display()))?;
    Ok(file.load()?)
}

fn signed_rows(id: &IdTable, lambdas: &[i8]) -> Vec<String> {
    id.rows().iter().zip(lambdas).map(|(r, &l)| if l < 0 { r.negated() } else { *r }.to_string()).collect()
}

fn find_ids(cli: &Cli, input: &str, max_m: usize, filter: IdFilter, count_only: bool) -> Result<Outcome> {
    let group = load_group(input)?;
    let found = find_ids_in_group(&group, max_m, filter)?;
    let mut text = String::new();
    if !count_only {
        for (i, g) in found.iter().enumerate() {
            let rows = signed_rows(&g.table, &g.lambdas);
            writeln!(text, "{:>4}  {:<9} {}", i + 1, g.table.label(), rows.join(" "))?;
        }
    }
    writeln!(text, "{} ID{}", found.len(), if found.len() == 1 { "" } else { "s" })?;
    print!("{text}");
    let json: Vec<Value> = found
        .iter()
        .map(|g| {
            let c = &g.classification;
            json!({
                "label": g.table.label(),
                "rows": g.table.rows(),
                "lambdas": g.lambdas,
                "sign": c.sign,
                "whole": c.is_whole,
                "entangled": c.is_entangled,
                "critical": c.is_critical,
                "eigenspace_rank": c.eigenspace_rank,
                "min_settings": c.min_settings,
            })
        })
        .collect();
    write_out(cli, &(serde_json::to_string_pretty(&json)? + "\n"))?;
    Ok(if found.is_empty() { Outcome::Empty } else { Outcome::Done })
}

enum Data {
    Table(ExactDataset),
    Counts(ExperimentDataset),
}

fn load_dataset(path: &Path) -> Result<Data> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let n = text
            .lines()
            .nth(1)
            .and_then(|l| l.split(',').next())
            .map(|s| s.trim().len())
            .ok_or_else(|| anyhow!("{} has no data rows", path.display()))?;
        return Ok(Data::Counts(ExperimentDataset::from_csv(n, text.as_bytes())?));
    }
    let value: Value = serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    if value.get("expectations").is_some() {
        Ok(Data::Table(ExactDataset::from_json(&text)?))
    } else {
        Ok(Data::Counts(ExperimentDataset::from_json(&text)?))
    }
}

fn certify(
    cli: &Cli,
    dataset: &Path,
    state: Option<&str>,
    id: &str,
    model: ErrorModel,
    gammas: Option<&Path>,
    plots: Option<&Path>,
) -> Result<Outcome> {
    let data = load_dataset(dataset)?;
    let counts;
    let source: &dyn ExpectationSource = match &data {
        Data::Table(t) => t,
        Data::Counts(d) => {
            counts = CountsSource { dataset: d, model };
            &counts
        }
    };
    let mut opts = ReportOptions { tomography_errors: Some(model), ..Default::default() };
    if let Some(s) = state {
        let (st, label) = load_state(s)?;
        opts.target = Some(st);
        opts.target_label = Some(label);
    }
    if id != "auto" {
        opts.id = Some(load_id(Path::new(id))?);
    }
    if let Some(g) = gammas {
        let table: Vec<GammaEstimate> = serde_json::from_str(&read(g)?).context("gamma table")?;
        opts.numeric_gammas = table.into_iter().map(|e| (e.class_label, e.value)).collect();
    }
    let report = certification_report(source, &opts)?;
    print!("{}", summary(&report));
    write_out(cli, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    if let Some(dir) = plots {
        fs::create_dir_all(dir)?;
        let (table, lambdas) = match &opts.id {
            Some(x) => x.clone(),
            None => (IdTable::parse(&report.id.rows)?, report.id.lambdas.clone()),
        };
        let ops: Vec<PauliOperator> =
            table.rows().iter().zip(&lambdas).map(|(r, &l)| if l < 0 { r.negated() } else { *r }).collect();
        fs::write(dir.join("expectations.csv"), expectation_plot_csv(source, &ops, opts.target.as_ref())?)?;
        fs::write(dir.join("fidelity.csv"), fidelity_plot_csv(&report)?)?;
    }
    Ok(Outcome::Done)
}

fn summary(r: &CertReport) -> String {
    let mut s = String::new();
    let signed: Vec<String> = r
        .id
        .rows
        .iter()
        .zip(&r.id.lambdas)
        .map(|(row, &l)| if l < 0 { format!("-{row}") } else { row.clone() })
        .collect();
    let _ = writeln!(s, "state      {}", r.state);
    let _ = writeln!(s, "ID         {}  {}", r.id.label, signed.join(" "));
    let _ = writeln!(s, "settings   {}", r.min_settings.join(" "));
    let a = &r.alpha;
    match a.lhvt {
        Some(l) => {
            let _ = writeln!(s, "alpha      {:.3} ± {:.3}  (quantum {}, local bound {})", a.exp, a.sigma, a.qm, l);
            let verdict = match a.violation_sigmas {
                Some(k) if a.exp > l => format!("violation by {k:.1}σ"),
                Some(k) => format!("no violation ({k:.1}σ)"),
                None if a.exp > l => "violation (no error bar)".to_string(),
                None => "no violation".to_string(),
            };
            let _ = writeln!(s, "Bell       {verdict}");
        }
        None => {
            let _ = writeln!(s, "alpha      {:.3} ± {:.3}  (quantum {}, no local bound)", a.exp, a.sigma, a.qm);
        }
    }
    let f = &r.fidelity;
    let _ = writeln!(s, "F_ID       {:.4} ± {:.4}", f.id.value, f.id.sigma);
    for (name, b) in [("F_GoSG", &f.gosg), ("F_SG", &f.sg), ("F_QST", &f.tomography)] {
        if let Some(b) = b {
            let _ = writeln!(s, "{name:<10} {:.4} ± {:.4}", b.value, b.sigma);
        }
    }
    for w in &r.witnesses {
        let verdict = if w.excluded() { "excluded" } else { "not excluded" };
        let _ = writeln!(
            s,
            "witness    {:<12} gamma {:.4}  <W> = {:.4} ± {:.4}  {verdict}",
            w.class, w.gamma, w.value, w.sigma
        );
    }
    let _ = writeln!(s, "p_max      {:.4}", r.noise_tolerance.p_max);
    for n in &r.notes {
        let _ = writeln!(s, "note       {n}");
    }
    s
}

fn gamma_cmd(cli: &Cli, id: &Path, catalog: Option<&Path>, starts: usize) -> Result<Outcome> {
    let (table, _) = load_id(id)?;
    let classes = match catalog {
        Some(path) => {
            let entries: Vec<CatalogEntry> = serde_json::from_str(&read(path)?).context("catalog")?;
            gamma::resolve_catalog(&entries)?
        }
        None if table.n_qubits() == 4 => gamma::four_qubit_catalog(),
        None => bail!("the built-in catalog is four-qubit; pass --catalog for a {}-qubit ID", table.n_qubits()),
    };
    if starts < 50 {
        eprintln!("warning: only {starts} start(s); upper bound may be loose");
    }
    let opts = GammaOptions { n_starts: starts, seed: cli.seed, ..GammaOptions::default() };
    let rows = gamma::gamma_table(&table, &classes, &opts)?;
    print!("{}", gamma::format_table(&rows));
    write_out(cli, &(serde_json::to_string_pretty(&rows)? + "\n"))?;
    Ok(Outcome::Done)
}

fn simulate(
    cli: &Cli,
    state: &str,
    p: f64,
    shots: u64,
    settings: &str,
    id: Option<&Path>,
    full_tomo: bool,
) -> Result<Outcome> {
    let (st, _) = load_state(state)?;
    let n = st.n_qubits();
    let mut plan = match settings {
        "full" => all_settings(n),
        "auto" => {
            let rows = match id {
                Some(path) => load_id(path)?.0.rows().to_vec(),
                None => {
                    let group = state_stabilizer(&st)?;
                    let chosen = auto_select_id(&group, &st)?
                        .ok_or_else(|| anyhow!("no critical ID in the state's group; pass --id"))?;
                    chosen.table.rows().to_vec()
                }
            };
            plan_settings(&rows)?
        }
        file => serde_json::from_str::<Vec<String>>(&read(Path::new(file))?).context("settings list")?,
    };
    if full_tomo {
        for s in all_settings(n) {
            if !plan.contains(&s) {
                plan.push(s);
            }
        }
    }
    let data = simulate_experiment(&st, p, &plan, shots, cli.seed)?;
    let text = data.to_json() + "\n";
    if cli.out.is_some() {
        write_out(cli, &text)?;
        println!("{} settings, {} counts", plan.len(), data.total_counts());
    } else {
        print!("{text}");
    }
    Ok(Outcome::Done)
}

fn tomo(cli: &Cli, dataset: &Path, state: &str, cycles: usize) -> Result<Outcome> {
    let Data::Counts(d) = load_dataset(dataset)? else {
        bail!("tomography needs a counts dataset");
    };
    let (target, _) = load_state(state)?;
    let t = linear_inversion_tomography(&d)?;
    let f = t.fidelity(&target)?;
    let mc = poisson_mc(&d, |x| Ok(linear_inversion_tomography(x)?.fidelity(&target)?), cycles, cli.seed)?;
    println!("fidelity        {f:.4} ± {:.4}", mc.sigma);
    println!("min eigenvalue  {:.4}", t.min_eigenvalue);
    if let Some(w) = &mc.warning {
        eprintln!("warning: {w}");
    }
    let dim = t.rho.nrows();
    let re: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| t.rho[(i, j)].re).collect()).collect();
    let im: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| t.rho[(i, j)].im).collect()).collect();
    let json = json!({
        "method": "linear-inversion",
        "n": d.n_qubits(),
        "fidelity": f,
        "sigma": mc.sigma,
        "min_eigenvalue": t.min_eigenvalue,
        "re": re,
        "im": im,
    });
    write_out(cli, &(serde_json::to_string_pretty(&json)? + "\n"))?;
    Ok(Outcome::Done)
}
