//! Command-line surface: momentum sweeps, figure datasets, transfer-matrix
//! chains, bound-state scans, composition checks, direct evolution, and
//! full circuit runs. All commands are deterministic; identical invocations
//! write identical files.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use gatewalk::bound::find_bound_states;
use gatewalk::circuit::CircuitDescription;
use gatewalk::compiler::{assemble_computer, AssembleOptions, Truncation};
use gatewalk::compose::{compose_blocks, extract_block, ChannelBlock};
use gatewalk::evolve::{
    evolve_state, run_computer, EvolveMethod, InputMode, PacketSpec, State,
};
use gatewalk::graph::GraphTopology;
use gatewalk::momentum::Momentum;
use gatewalk::scattering::solve_scattering;
use gatewalk::transfer::{chain_transmission, decoration_ratio, transfer_step};
use gatewalk::widgets::{self, Widget};

#[derive(Parser)]
#[command(name = "gatewalk", about = "Quantum circuits as graphs, run by quantum walk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate scattering coefficients of a widget or graph over momenta.
    Sweep(SweepArgs),
    /// Tabulate the filter-chain transfer matrix: eigenvalue magnitudes and
    /// chain transmission.
    Transfer(TransferArgs),
    /// List the bound states of a graph.
    Bound(BoundArgs),
    /// Check block composition against the directly glued graph.
    ComposeCheck(ComposeCheckArgs),
    /// Evolve a vertex state on a finite graph and dump the distribution.
    Evolve(EvolveArgs),
    /// Compile, assemble, and run a circuit; write the measurement report.
    Run(RunArgs),
    /// Emit the five widget figure datasets.
    Figures(FiguresArgs),
}

#[derive(Args)]
struct KRange {
    /// Lower momentum bound (open band (-pi, 0)).
    #[arg(long, default_value_t = -PI + 2e-3, allow_hyphen_values = true)]
    kmin: f64,
    /// Upper momentum bound.
    #[arg(long, default_value_t = -0.002, allow_hyphen_values = true)]
    kmax: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 500)]
    points: usize,
}

impl KRange {
    fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            bail!("at least 2 points required");
        }
        if self.kmax <= self.kmin {
            bail!("kmax must exceed kmin");
        }
        let step = (self.kmax - self.kmin) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.kmin + step * i as f64).collect())
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Catalog widget name (wire:N, cnot, phase, basis, filter, separator).
    #[arg(long, conflicts_with = "graph")]
    widget: Option<String>,
    /// Graph file to sweep instead of a catalog widget.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Channels as from:to pairs, comma separated (default: first input
    /// terminal to every terminal).
    #[arg(long, value_delimiter = ',')]
    channels: Vec<String>,
    #[command(flatten)]
    krange: KRange,
    /// Also print the catalog closed-form value for each channel.
    #[arg(long)]
    reference: bool,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransferArgs {
    /// Number of filter widgets in the chain.
    #[arg(long, default_value_t = 10)]
    md: usize,
    #[command(flatten)]
    krange: KRange,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// Graph file.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct ComposeCheckArgs {
    /// Two or more widget names, composed left to right.
    #[arg(long, value_delimiter = ',', required = true)]
    widgets: Vec<String>,
    /// Momentum at which to compare.
    #[arg(long, allow_hyphen_values = true)]
    k: f64,
}

#[derive(Args)]
struct EvolveArgs {
    /// Graph file.
    #[arg(long)]
    graph: PathBuf,
    /// Start vertex of the walker.
    #[arg(long)]
    vertex: usize,
    /// Evolution time.
    #[arg(long)]
    time: f64,
    /// auto | dense | chebyshev
    #[arg(long, default_value = "auto")]
    method: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default, Clone)]
struct RunArgs {
    /// Flat key=value config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Circuit file.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Walker start offset x on the input lead.
    #[arg(long)]
    x: Option<usize>,
    /// Filter count m_d (default 2 ceil(log2(m + 2))).
    #[arg(long)]
    md: Option<usize>,
    /// Lead truncation length (default 2(x + l) rounded up).
    #[arg(long)]
    truncation: Option<usize>,
    /// Accept a truncation below the soundness bound.
    #[arg(long)]
    allow_unsound: bool,
    /// vertex | packet
    #[arg(long)]
    mode: Option<String>,
    /// Packet width.
    #[arg(long)]
    sigma: Option<f64>,
    /// Packet center (defaults to x).
    #[arg(long)]
    center: Option<usize>,
    /// Packet carrier momentum.
    #[arg(long, allow_hyphen_values = true)]
    momentum: Option<f64>,
    /// auto | dense | chebyshev
    #[arg(long)]
    method: Option<String>,
    /// Report output file (JSON document; stdout when omitted).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Dump the per-vertex probability distribution to this file.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct FiguresArgs {
    /// Directory for the emitted datasets.
    #[arg(long)]
    outdir: PathBuf,
    #[arg(long, default_value_t = 500)]
    points: usize,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Transfer(args) => cmd_transfer(args),
        Command::Bound(args) => cmd_bound(args),
        Command::ComposeCheck(args) => cmd_compose_check(args),
        Command::Evolve(args) => cmd_evolve(args),
        Command::Run(args) => cmd_run(args),
        Command::Figures(args) => cmd_figures(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn write_out(path: &Option<PathBuf>, contents: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, contents)
            .with_context(|| format!("writing {}", p.display()))?,
        None => print!("{contents}"),
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<GraphTopology> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading graph file {}", path.display()))?;
    GraphTopology::from_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn sweep_table(
    g: &GraphTopology,
    widget: Option<&dyn Widget>,
    channels: &[(String, String)],
    ks: &[f64],
    reference: bool,
) -> String {
    let mut out = String::new();
    out.push_str("# k");
    for (from, to) in channels {
        out.push_str(&format!(
            ",re_{from}:{to},im_{from}:{to},abs2_{from}:{to}"
        ));
        if reference {
            out.push_str(&format!(",ref_re_{from}:{to},ref_im_{from}:{to}"));
        }
    }
    out.push('\n');
    for &k in ks {
        let km = match Momentum::new(k) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("warning: skipping k = {k}: {e}");
                continue;
            }
        };
        let mut row = format!("{k:.12}");
        let mut ok = true;
        for (from, to) in channels {
            let sol = match solve_scattering(g, km, from) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("warning: skipping k = {k}: {e}");
                    ok = false;
                    break;
                }
            };
            let t = match sol.transmission_to(to) {
                Some(t) => t,
                None => {
                    eprintln!("warning: no terminal '{to}'");
                    ok = false;
                    break;
                }
            };
            row.push_str(&format!(",{:.12e},{:.12e},{:.12e}", t.re, t.im, t.norm_sqr()));
            if reference {
                match widget.and_then(|w| w.closed_form(from, to, k)) {
                    Some(r) => row.push_str(&format!(",{:.12e},{:.12e}", r.re, r.im)),
                    None => row.push_str(",nan,nan"),
                }
            }
        }
        if ok {
            out.push_str(&row);
            out.push('\n');
        }
    }
    out
}

fn default_channels(g: &GraphTopology) -> Vec<(String, String)> {
    use gatewalk::graph::TerminalKind;
    let first_input = g
        .terminals()
        .iter()
        .find(|t| t.kind == TerminalKind::Input)
        .or_else(|| g.terminals().first())
        .map(|t| t.name.clone());
    match first_input {
        Some(from) => g
            .terminals()
            .iter()
            .map(|t| (from.clone(), t.name.clone()))
            .collect(),
        None => Vec::new(),
    }
}

fn parse_channels(specs: &[String]) -> Result<Vec<(String, String)>> {
    specs
        .iter()
        .map(|s| {
            s.split_once(':')
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .with_context(|| format!("channel '{s}' must be from:to"))
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let (g, widget): (GraphTopology, Option<Box<dyn Widget>>) = match (&args.widget, &args.graph) {
        (Some(name), None) => {
            let w = widgets::lookup(name)?;
            (w.build(), Some(w))
        }
        (None, Some(path)) => (load_graph(path)?, None),
        (None, None) => {
            bail!("one of --widget or --graph is required")
        }
        _ => unreachable!("clap conflicts_with"),
    };
    let channels = if args.channels.is_empty() {
        default_channels(&g)
    } else {
        parse_channels(&args.channels)?
    };
    let ks = args.krange.values()?;
    let table = sweep_table(&g, widget.as_deref(), &channels, &ks, args.reference);
    write_out(&args.out, &table)
}

fn cmd_transfer(args: TransferArgs) -> Result<()> {
    let filter = widgets::Filter.build();
    let ks = args.krange.values()?;
    let mut out = String::from("# k,lambda_small,lambda_large,re_T,im_T,abs2_T\n");
    for k in ks {
        let km = match Momentum::new(k) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("warning: skipping k = {k}: {e}");
                continue;
            }
        };
        let y = match decoration_ratio(&filter, "in", km) {
            Ok(y) => y,
            Err(e) => {
                eprintln!("warning: skipping k = {k}: {e}");
                continue;
            }
        };
        let (lo, hi) = transfer_step(y, km).eigenvalue_magnitudes();
        let chain = chain_transmission(y, args.md, km)?;
        let t = chain.transmission;
        out.push_str(&format!(
            "{k:.12},{lo:.12e},{hi:.12e},{:.12e},{:.12e},{:.12e}\n",
            t.re,
            t.im,
            t.norm_sqr()
        ));
    }
    write_out(&args.out, &out)
}

fn cmd_bound(args: BoundArgs) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let states = find_bound_states(&g);
    if states.is_empty() {
        println!("no bound states");
        return Ok(());
    }
    println!("# kappa,energy,residual,lead_amplitudes");
    for st in states {
        let leads: Vec<String> = st
            .lead_amplitudes
            .iter()
            .map(|(n, a)| format!("{n}={:.6}", a.re))
            .collect();
        println!(
            "{:.12},{:+.12},{:.3e},{}",
            st.kappa,
            st.energy,
            st.residual,
            leads.join(";")
        );
    }
    Ok(())
}

/// A compose-check element: a graph with ordered channel terminals.
struct Element {
    graph: GraphTopology,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

fn channel_names(name: &str) -> (Vec<&'static str>, Vec<&'static str>) {
    match name.split(':').next().unwrap() {
        "basis" => (vec!["0_in", "1_in"], vec!["0_out", "1_out"]),
        "cnot" => (
            vec!["00_in", "01_in", "10_in", "11_in"],
            vec!["00_out", "01_out", "10_out", "11_out"],
        ),
        _ => (vec!["in"], vec!["out"]),
    }
}

fn element(name: &str) -> Result<Element> {
    let w = widgets::lookup(name)?;
    let (ins, outs) = channel_names(name);
    Ok(Element {
        graph: w.build(),
        inputs: ins.iter().map(|s| s.to_string()).collect(),
        outputs: outs.iter().map(|s| s.to_string()).collect(),
    })
}

/// Lift a one-channel widget to its two-wire gate layer: a unit wire on
/// channel 0 and the widget on channel 1, matching how single-qubit gate
/// widgets embed in a compiled circuit.
fn lift_to_layer(el: &Element) -> Result<Element> {
    use gatewalk::graph::{Terminal, TerminalKind};
    if el.inputs.len() != 1 {
        bail!("only one-channel widgets can be lifted to a gate layer");
    }
    let shift = 2usize;
    let mut edges = vec![(0usize, 1usize)];
    for (u, v) in el.graph.edges() {
        edges.push((u + shift, v + shift));
    }
    let mut terminals = vec![
        Terminal { name: "0_in".into(), vertex: 0, kind: TerminalKind::Input },
        Terminal { name: "0_out".into(), vertex: 1, kind: TerminalKind::Output },
    ];
    for t in el.graph.terminals() {
        let name = if t.name == el.inputs[0] {
            "1_in".to_string()
        } else if t.name == el.outputs[0] {
            "1_out".to_string()
        } else {
            t.name.clone()
        };
        terminals.push(Terminal {
            name,
            vertex: t.vertex + shift,
            kind: t.kind,
        });
    }
    Ok(Element {
        graph: GraphTopology::new(el.graph.vertex_count() + shift, edges, terminals)?,
        inputs: vec!["0_in".into(), "1_in".into()],
        outputs: vec!["0_out".into(), "1_out".into()],
    })
}

fn cmd_compose_check(args: ComposeCheckArgs) -> Result<()> {
    if args.widgets.len() < 2 {
        bail!("need at least two widgets");
    }
    let km = Momentum::new(args.k)?;
    let mut elements = args
        .widgets
        .iter()
        .map(|n| element(n))
        .collect::<Result<Vec<_>>>()?;
    // Mixing one-channel widgets with the two-channel gate embeds the
    // former as two-wire layers (wire on channel 0, widget on channel 1).
    let widest = elements.iter().map(|e| e.inputs.len()).max().unwrap();
    if widest == 2 && elements.iter().any(|e| e.inputs.len() == 1) {
        for el in elements.iter_mut() {
            if el.inputs.len() == 1 {
                *el = lift_to_layer(el)?;
            }
        }
    }
    if elements.iter().any(|e| e.inputs.len() != widest) {
        bail!("widgets have incompatible channel counts");
    }
    fn strs(v: &[String]) -> Vec<&str> {
        v.iter().map(|s| s.as_str()).collect()
    }
    let first = &elements[0];
    let mut glued = first.graph.clone();
    let mut block: ChannelBlock =
        extract_block(&glued, km, &strs(&first.inputs), &strs(&first.outputs))?;
    let outs = first.outputs.clone();
    for el in &elements[1..] {
        let next = extract_block(&el.graph, km, &strs(&el.inputs), &strs(&el.outputs))?;
        block = compose_blocks(&block, &next)?;
        let pairing: Vec<(&str, &str)> = outs
            .iter()
            .zip(el.inputs.iter())
            .map(|(o, i)| (o.as_str(), i.as_str()))
            .collect();
        glued = glued.glue(&el.graph, &pairing)?;
    }
    let direct = extract_block(
        &glued,
        km,
        &block.inputs.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
        &block.outputs.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
    )?;
    let mut worst = 0.0f64;
    for (a, b) in [
        (&block.forward, &direct.forward),
        (&block.reflect, &direct.reflect),
        (&block.backward, &direct.backward),
        (&block.reflect_back, &direct.reflect_back),
    ] {
        worst = worst.max(a.sub(b).max_abs());
    }
    println!(
        "composed {} widgets at k = {}: max deviation from glued solve = {worst:.3e}",
        args.widgets.len(),
        args.k
    );
    if worst > 1e-8 {
        bail!("composition deviates by {worst:.3e} (tolerance 1e-8)");
    }
    Ok(())
}

fn cmd_evolve(args: EvolveArgs) -> Result<()> {
    let g = load_graph(&args.graph)?;
    if args.vertex >= g.vertex_count() {
        bail!("vertex {} out of range", args.vertex);
    }
    let method: EvolveMethod = args.method.parse().map_err(|e: String| anyhow::anyhow!(e))?;
    let state = State::basis(g.vertex_count(), args.vertex);
    let out = evolve_state(&g, &state, args.time, method)?;
    let mut table = String::from("# vertex,probability\n");
    for v in 0..g.vertex_count() {
        table.push_str(&format!("{v},{:.12e}\n", out.probability(v)));
    }
    write_out(&args.out, &table)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("config line {}: expected key=value", i + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn cmd_run(mut args: RunArgs) -> Result<()> {
    if let Some(path) = &args.config {
        let cfg = read_config(path)?;
        let get = |key: &str| cfg.get(key).cloned();
        if args.circuit.is_none() {
            args.circuit = get("circuit").map(PathBuf::from);
        }
        macro_rules! fill {
            ($field:ident, $key:literal, $ty:ty) => {
                if args.$field.is_none() {
                    if let Some(v) = get($key) {
                        args.$field =
                            Some(v.parse::<$ty>().with_context(|| {
                                format!("config key {}: bad value '{v}'", $key)
                            })?);
                    }
                }
            };
        }
        fill!(x, "x", usize);
        fill!(md, "md", usize);
        fill!(truncation, "truncation", usize);
        fill!(sigma, "sigma", f64);
        fill!(center, "center", usize);
        fill!(momentum, "momentum", f64);
        if args.mode.is_none() {
            args.mode = get("mode");
        }
        if args.method.is_none() {
            args.method = get("method");
        }
        if !args.allow_unsound {
            args.allow_unsound = get("allow_unsound").map(|v| v == "true").unwrap_or(false);
        }
        if args.report.is_none() {
            args.report = get("report").map(PathBuf::from);
        }
        if args.dump.is_none() {
            args.dump = get("dump").map(PathBuf::from);
        }
    }
    let circuit_path = args
        .circuit
        .context("no circuit file (pass --circuit or set circuit= in the config)")?;
    let text = std::fs::read_to_string(&circuit_path)
        .with_context(|| format!("reading circuit {}", circuit_path.display()))?;
    let circuit = CircuitDescription::parse(&text)?;
    let x = args.x.unwrap_or(400);
    let opts = AssembleOptions {
        start_offset: x,
        filter_count: args.md,
        truncation: match args.truncation {
            Some(n) => Truncation::Explicit(n),
            None => Truncation::Auto,
        },
        allow_unsound: args.allow_unsound,
    };
    let machine = assemble_computer(&circuit, &opts)?;
    let mode = match args.mode.as_deref().unwrap_or("packet") {
        "vertex" => InputMode::Vertex,
        "packet" => InputMode::Packet(PacketSpec {
            wire: machine.zero_label(),
            center: args.center.unwrap_or(x),
            sigma: args.sigma.unwrap_or(25.0),
            momentum: Momentum::new(args.momentum.unwrap_or(-PI / 4.0))?,
        }),
        other => bail!("unknown mode '{other}' (vertex | packet)"),
    };
    let method: EvolveMethod = args
        .method
        .as_deref()
        .unwrap_or("auto")
        .parse()
        .map_err(|e: String| anyhow::anyhow!(e))?;
    let report = run_computer(&machine, &mode, method)?;
    let json = serde_json::to_string_pretty(&report)?;
    match &args.report {
        Some(p) => {
            std::fs::write(p, &json).with_context(|| format!("writing {}", p.display()))?
        }
        None => println!("{json}"),
    }
    if let Some(dump) = &args.dump {
        let mut f = std::io::BufWriter::new(
            std::fs::File::create(dump).with_context(|| format!("writing {}", dump.display()))?,
        );
        writeln!(f, "# vertex,wire,position,probability")?;
        let mut location = vec![(String::from("interior"), 0usize); machine.graph.vertex_count()];
        for (label, lead) in &machine.input_leads {
            for (i, &v) in lead.iter().enumerate() {
                location[v] = (format!("{label}_in"), i + 1);
            }
        }
        for (label, lead) in &machine.output_leads {
            for (i, &v) in lead.iter().enumerate() {
                location[v] = (format!("{label}_out"), i + 1);
            }
        }
        for (d, lead) in machine.drain_leads.iter().enumerate() {
            for (i, &v) in lead.iter().enumerate() {
                location[v] = (format!("drain{d}"), i + 1);
            }
        }
        for (v, p) in report.vertex_distribution.iter().enumerate() {
            writeln!(f, "{v},{},{},{:.12e}", location[v].0, location[v].1, p)?;
        }
    }
    Ok(())
}

fn cmd_figures(args: FiguresArgs) -> Result<()> {
    std::fs::create_dir_all(&args.outdir)
        .with_context(|| format!("creating {}", args.outdir.display()))?;
    let krange = KRange {
        kmin: -PI + 2e-3,
        kmax: -2e-3,
        points: args.points,
    };
    let ks = krange.values()?;
    let emit = |name: &str, contents: String| -> Result<()> {
        let path = args.outdir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    };
    // transmission probability of the phase-shift widget
    let phase = widgets::PhaseShift;
    emit(
        "phase_transmission.csv",
        sweep_table(
            &phase.build(),
            Some(&phase),
            &[("in".into(), "out".into())],
            &ks,
            false,
        ),
    )?;
    // basis-changing widget: straight, cross, and input-side transmissions
    let basis = widgets::BasisChange;
    emit(
        "basis_transmission.csv",
        sweep_table(
            &basis.build(),
            Some(&basis),
            &[
                ("0_in".into(), "0_out".into()),
                ("0_in".into(), "1_out".into()),
                ("0_in".into(), "1_in".into()),
            ],
            &ks,
            false,
        ),
    )?;
    // filter widget: through and up the drain
    let filter = widgets::Filter;
    emit(
        "filter_transmission.csv",
        sweep_table(
            &filter.build(),
            Some(&filter),
            &[
                ("in".into(), "out".into()),
                ("in".into(), "drain".into()),
            ],
            &ks,
            false,
        ),
    )?;
    // transfer-matrix eigenvalue magnitudes
    {
        let fg = filter.build();
        let mut out = String::from("# k,lambda_small,lambda_large\n");
        for &k in &ks {
            let km = match Momentum::new(k) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let y = match decoration_ratio(&fg, "in", km) {
                Ok(y) => y,
                Err(e) => {
                    eprintln!("warning: skipping k = {k}: {e}");
                    continue;
                }
            };
            let (lo, hi) = transfer_step(y, km).eigenvalue_magnitudes();
            out.push_str(&format!("{k:.12},{lo:.12e},{hi:.12e}\n"));
        }
        emit("transfer_eigenvalues.csv", out)?;
    }
    // separator transmission
    let sep = widgets::Separator;
    emit(
        "separator_transmission.csv",
        sweep_table(
            &sep.build(),
            Some(&sep),
            &[("in".into(), "out".into())],
            &ks,
            false,
        ),
    )?;
    println!("wrote 5 datasets to {}", args.outdir.display());
    Ok(())
}
