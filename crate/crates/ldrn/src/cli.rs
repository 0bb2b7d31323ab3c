//! Command-line front door: generate instances, compute capacities, find
//! flows, build codes, simulate, and verify, all with JSON on stdout.
//!
//! Exit codes: 0 on success, 1 when a verification or feasibility check
//! fails, 2 on usage errors (bad flags, unreadable or malformed files).

use crate::capacity::{min_cut_jobs, multicast_capacity_jobs};
use crate::flow::{find_flow, unicast_transmit, verify_flow, Flow};
use crate::gf::Field;
use crate::multicast::{build_code, AssignMode, BuildOptions, MulticastCode};
use crate::network::{gen_random, GenParams, Network};
use crate::rounds::{lift_network, required_rounds};
use crate::sim::{coding_matrices, simulate, Trace};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Messages spaces up to this size are swept exhaustively.
const SWEEP_LIMIT: u64 = 256;
/// Random-message count used when a sweep would be too large.
const RANDOM_MESSAGES: usize = 100;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or unusable input files; exit code 2.
    Usage(String),
    /// A check failed on valid inputs; exit code 1.
    Check(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Check(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ldrn",
    version,
    about = "Multicast coding schemes for linear deterministic relay networks"
)]
pub struct Cli {
    /// Worker threads for cut enumeration; never changes results.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random network and report its capacities.
    Gen(GenArgs),
    /// Print per-destination min-cuts and the multicast capacity.
    Capacity { network: PathBuf },
    /// Find a rate-R flow to one destination.
    Flow(FlowArgs),
    /// Build a multicast code.
    Code(CodeArgs),
    /// Transmit messages end to end and check decoding.
    Simulate(SimulateArgs),
    /// Verify a network, flow, or code artifact.
    Verify {
        network: PathBuf,
        /// Flow or code JSON; recognized by shape.
        artifact: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of layers; must match the node list length.
    #[arg(long)]
    pub layers: usize,
    /// Comma-separated node counts per layer, e.g. 1,2,2.
    #[arg(long)]
    pub nodes: String,
    /// Per-node port dimensions, "lo,hi" or a single value.
    #[arg(long, default_value = "1,3")]
    pub dims: String,
    /// Probability that a sampled transfer entry is kept rather than zeroed.
    #[arg(long, default_value_t = 1.0)]
    pub density: f64,
    /// Field as "p" or "p,k".
    #[arg(long, default_value = "2")]
    pub field: String,
    /// Number of destinations.
    #[arg(long, default_value_t = 1)]
    pub dests: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    pub network: PathBuf,
    /// 1-based index into the network's destination list.
    #[arg(long)]
    pub dest: usize,
    #[arg(long)]
    pub rate: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CodeArgs {
    pub network: PathBuf,
    /// det (deterministic) or rand (randomized).
    #[arg(long, default_value = "det")]
    pub mode: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// "auto" lifts to GF(p^k) when the field is too small; an integer
    /// forces that many rounds.
    #[arg(long, default_value = "auto")]
    pub rounds: String,
    #[arg(long, default_value_t = 20)]
    pub max_retries: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the per-port assignment ledger.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub network: PathBuf,
    pub code: PathBuf,
    /// One message as comma-separated field elements.
    #[arg(long, conflicts_with_all = ["sweep", "random"])]
    pub message: Option<String>,
    /// Sweep the entire message space (only when it has at most 256 points).
    #[arg(long, conflicts_with = "random")]
    pub sweep: bool,
    /// Try N seeded random messages.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args, cli.jobs),
        Command::Capacity { network } => cmd_capacity(&network, cli.jobs),
        Command::Flow(args) => cmd_flow(args),
        Command::Code(args) => cmd_code(args, cli.jobs),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify { network, artifact } => cmd_verify(&network, artifact.as_deref()),
    }
}

fn cmd_gen(args: GenArgs, jobs: usize) -> Result<(), CliError> {
    let node_counts = parse_usize_list(&args.nodes)?;
    if node_counts.len() != args.layers {
        return Err(CliError::Usage(format!(
            "--layers {} disagrees with {} node counts",
            args.layers,
            node_counts.len()
        )));
    }
    let field = parse_field(&args.field)?;
    let dim_range = parse_dims(&args.dims)?;
    let net = gen_random(&GenParams {
        seed: args.seed,
        node_counts,
        dim_range,
        density: args.density,
        field,
        destination_count: args.dests,
    })
    .map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::write(&args.out, net.save())
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", args.out.display())))?;
    let summary = capacity_summary(&net, jobs);
    print_json(&json!({
        "file": args.out.display().to_string(),
        "seed": args.seed,
        "multicast_capacity": summary.0,
        "per_destination": summary.1,
    }));
    Ok(())
}

fn cmd_capacity(path: &Path, jobs: usize) -> Result<(), CliError> {
    let net = load_network(path)?;
    if net.destinations().is_empty() {
        return Err(CliError::Usage("network declares no destinations".into()));
    }
    let (capacity, per_dest) = capacity_summary(&net, jobs);
    print_json(&json!({
        "multicast_capacity": capacity,
        "per_destination": per_dest,
    }));
    Ok(())
}

fn capacity_summary(net: &Network, jobs: usize) -> (Option<usize>, Vec<serde_json::Value>) {
    let per_dest: Vec<serde_json::Value> = net
        .destinations()
        .iter()
        .map(|&t| {
            json!({
                "layer": t.layer + 1,
                "node": t.node + 1,
                "min_cut": min_cut_jobs(net, t, jobs),
            })
        })
        .collect();
    (multicast_capacity_jobs(net, jobs), per_dest)
}

fn cmd_flow(args: FlowArgs) -> Result<(), CliError> {
    let net = load_network(&args.network)?;
    let dests = net.destinations();
    if args.dest == 0 || args.dest > dests.len() {
        return Err(CliError::Usage(format!(
            "--dest must be in 1..={}, found {}",
            dests.len(),
            args.dest
        )));
    }
    let target = dests[args.dest - 1];
    match find_flow(&net, target, args.rate) {
        Some(flow) => {
            let text = flow.save();
            if let Some(out) = &args.out {
                std::fs::write(out, &text)
                    .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", out.display())))?;
            }
            print!("{text}");
            Ok(())
        }
        None => Err(CliError::Check(format!(
            "no rate-{} flow to destination {} ({target})",
            args.rate, args.dest
        ))),
    }
}

fn cmd_code(args: CodeArgs, jobs: usize) -> Result<(), CliError> {
    let base = load_network(&args.network)?;
    let mode = match args.mode.as_str() {
        "det" | "deterministic" => AssignMode::Deterministic,
        "rand" | "randomized" => AssignMode::Randomized,
        other => return Err(CliError::Usage(format!("unknown mode {other:?}"))),
    };
    let g = base.destinations().len() as u64;
    if g == 0 {
        return Err(CliError::Usage("network declares no destinations".into()));
    }
    let rounds = match args.rounds.as_str() {
        "auto" => {
            if base.field().order() > g {
                1
            } else if base.field().degree() != 1 {
                return Err(CliError::Usage(format!(
                    "field {} is too small for {g} destinations and is already an extension; \
                     choose a larger base field",
                    base.field()
                )));
            } else {
                required_rounds(base.field().characteristic(), g as usize)
            }
        }
        text => text.parse::<u32>().map_err(|_| {
            CliError::Usage(format!(
                "--rounds must be 'auto' or an integer, found {text:?}"
            ))
        })?,
    };
    // rounds == 1 means "use the network as is"; an explicit count equal to
    // an extension base's degree is likewise already satisfied.
    let net = if rounds == 1 || rounds == base.field().degree() {
        base.clone()
    } else {
        lift_network(&base, rounds).map_err(|e| CliError::Usage(e.to_string()))?
    };
    let rate = multicast_capacity_jobs(&net, jobs)
        .ok_or_else(|| CliError::Usage("network declares no destinations".into()))?;
    let outcome = build_code(
        &net,
        &BuildOptions {
            mode,
            seed: args.seed,
            rate: Some(rate),
            max_retries: args.max_retries,
            transcript: args.transcript.is_some(),
        },
    )
    .map_err(|e| CliError::Check(e.to_string()))?;
    std::fs::write(&args.out, outcome.code.save())
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", args.out.display())))?;
    if let Some(path) = &args.transcript {
        let transcript = outcome.transcript.expect("requested transcript");
        let mut text = serde_json::to_string_pretty(&transcript).expect("transcript serialization");
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    print_json(&json!({
        "out": args.out.display().to_string(),
        "mode": if mode == AssignMode::Deterministic { "deterministic" } else { "randomized" },
        "rate": outcome.code.rate,
        "rounds": rounds,
        "field": {"p": net.field().characteristic(), "k": net.field().degree()},
        "destinations": outcome.code.decoders().len(),
    }));
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let base = load_network(&args.network)?;
    let code = load_code(&args.code)?;
    let net = align_field(&base, &code)?;
    let q = net.field().order();
    let rate = code.rate;

    if let Some(text) = &args.message {
        let message = parse_u64_list(text)?;
        let trace = simulate(&net, &code, &message).map_err(|e| CliError::Usage(e.to_string()))?;
        let ok = trace.all_ok();
        print_json(&trace_json(&trace));
        return if ok {
            Ok(())
        } else {
            Err(CliError::Check("some destination failed to decode".into()))
        };
    }

    let messages: Vec<Vec<u64>> = if args.sweep {
        let space = q.checked_pow(rate as u32).filter(|&n| n <= SWEEP_LIMIT);
        let Some(total) = space else {
            return Err(CliError::Usage(format!(
                "message space {q}^{rate} is larger than {SWEEP_LIMIT}; use --random N"
            )));
        };
        (0..total).map(|n| index_message(n, q, rate)).collect()
    } else if let Some(count) = args.random {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        (0..count)
            .map(|_| (0..rate).map(|_| rng.gen_range(0..q)).collect())
            .collect()
    } else {
        return Err(CliError::Usage(
            "choose one of --message, --sweep, or --random N".into(),
        ));
    };

    let mut failures = Vec::new();
    for message in &messages {
        let trace = simulate(&net, &code, message).map_err(|e| CliError::Usage(e.to_string()))?;
        for d in &trace.destinations {
            if !d.ok {
                failures.push(json!({
                    "message": message,
                    "destination": {"layer": d.layer, "node": d.node},
                    "decoded": d.decoded,
                }));
            }
        }
    }
    let ok = failures.is_empty();
    print_json(&json!({
        "mode": if args.sweep { "sweep" } else { "random" },
        "messages": messages.len(),
        "ok": ok,
        "summary": if ok {
            "all messages decoded at all destinations".to_string()
        } else {
            format!("{} decode failures", failures.len())
        },
        "failures": failures,
    }));
    if ok {
        Ok(())
    } else {
        Err(CliError::Check("some destination failed to decode".into()))
    }
}

fn cmd_verify(network: &Path, artifact: Option<&Path>) -> Result<(), CliError> {
    let base = load_network(network)?;
    let mut checks: Vec<serde_json::Value> = Vec::new();
    let mut failures: Vec<String> = Vec::new();
    let violations = base.validate();
    push_check(
        &mut checks,
        &mut failures,
        "network structure",
        violations.is_empty(),
        violations.join("; "),
    );

    match artifact {
        None => {}
        Some(path) => {
            let bytes = read_file(path)?;
            let value: serde_json::Value = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            if value.get("nodes").is_some() {
                let code = MulticastCode::load(&bytes)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                verify_code(&base, &code, &mut checks, &mut failures)?;
            } else if value.get("destination").is_some() {
                let flow = Flow::load(&bytes)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                verify_flow_artifact(&base, &flow, &mut checks, &mut failures);
            } else {
                return Err(CliError::Usage(format!(
                    "{} is neither a flow nor a code artifact",
                    path.display()
                )));
            }
        }
    }

    let ok = failures.is_empty();
    print_json(&json!({"ok": ok, "checks": checks}));
    if ok {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "verification failed: {}",
            failures.join("; ")
        )))
    }
}

fn verify_code(
    base: &Network,
    code: &MulticastCode,
    checks: &mut Vec<serde_json::Value>,
    failures: &mut Vec<String>,
) -> Result<(), CliError> {
    let net = align_field(base, code)?;
    let mats = match coding_matrices(&net, code) {
        Ok(m) => m,
        Err(e) => {
            push_check(checks, failures, "code shape", false, e.to_string());
            return Ok(());
        }
    };
    push_check(checks, failures, "code shape", true, String::new());

    for (l, d) in code.decoders().iter().enumerate() {
        let name = format!("destination {} ({})", l + 1, d.dest);
        let start = net.rx_block_start(d.dest);
        let rows: Vec<usize> = d.ports.iter().map(|&p| start + p).collect();
        let sub = mats[d.dest.layer].select_rows(&rows);
        if !sub.is_nonsingular() {
            push_check(
                checks,
                failures,
                &name,
                false,
                "received coding matrix is singular".into(),
            );
            continue;
        }
        let product = d.decoder.mul(&sub);
        let ok = product == crate::gf::Matrix::identity(net.field().clone(), code.rate);
        push_check(
            checks,
            failures,
            &name,
            ok,
            if ok {
                String::new()
            } else {
                "decoder does not invert the received coding matrix".into()
            },
        );
    }

    // Decode sweep: exhaustive when small, seeded random otherwise.
    let q = net.field().order();
    let rate = code.rate;
    let messages: Vec<Vec<u64>> = match q.checked_pow(rate as u32).filter(|&n| n <= SWEEP_LIMIT) {
        Some(total) => (0..total).map(|n| index_message(n, q, rate)).collect(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            (0..RANDOM_MESSAGES)
                .map(|_| (0..rate).map(|_| rng.gen_range(0..q)).collect())
                .collect()
        }
    };
    let mut bad = None;
    for message in &messages {
        match simulate(&net, code, message) {
            Ok(trace) => {
                if let Some(d) = trace.destinations.iter().find(|d| !d.ok) {
                    bad = Some(format!(
                        "message {message:?} not decoded at destination v_{}({})",
                        d.layer, d.node
                    ));
                    break;
                }
            }
            Err(e) => {
                bad = Some(e.to_string());
                break;
            }
        }
    }
    push_check(
        checks,
        failures,
        &format!("decode sweep ({} messages)", messages.len()),
        bad.is_none(),
        bad.unwrap_or_default(),
    );
    Ok(())
}

fn verify_flow_artifact(
    net: &Network,
    flow: &Flow,
    checks: &mut Vec<serde_json::Value>,
    failures: &mut Vec<String>,
) {
    let violations = verify_flow(net, flow);
    push_check(
        checks,
        failures,
        "flow properties",
        violations.is_empty(),
        violations.join("; "),
    );
    if !violations.is_empty() {
        return;
    }
    let q = net.field().order();
    let rate = flow.rate();
    let messages: Vec<Vec<u64>> = match q.checked_pow(rate as u32).filter(|&n| n <= SWEEP_LIMIT) {
        Some(total) => (0..total).map(|n| index_message(n, q, rate)).collect(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            (0..RANDOM_MESSAGES)
                .map(|_| (0..rate).map(|_| rng.gen_range(0..q)).collect())
                .collect()
        }
    };
    let bad = messages
        .iter()
        .find(|m| &unicast_transmit(net, flow, m) != *m)
        .map(|m| format!("message {m:?} not recovered"));
    push_check(
        checks,
        failures,
        &format!("unicast decode sweep ({} messages)", messages.len()),
        bad.is_none(),
        bad.unwrap_or_default(),
    );
}

fn push_check(
    checks: &mut Vec<serde_json::Value>,
    failures: &mut Vec<String>,
    name: &str,
    ok: bool,
    detail: String,
) {
    if !ok {
        failures.push(if detail.is_empty() {
            name.to_string()
        } else {
            format!("{name}: {detail}")
        });
    }
    checks.push(if detail.is_empty() {
        json!({"name": name, "ok": ok})
    } else {
        json!({"name": name, "ok": ok, "detail": detail})
    });
}

/// Lift the base network when the code was built over an extension of its
/// prime field.
fn align_field(base: &Network, code: &MulticastCode) -> Result<Network, CliError> {
    if &code.field == base.field() {
        return Ok(base.clone());
    }
    if base.field().degree() == 1 && code.field.characteristic() == base.field().characteristic() {
        return lift_network(base, code.field.degree()).map_err(|e| CliError::Usage(e.to_string()));
    }
    Err(CliError::Usage(format!(
        "code field {} does not match network field {}",
        code.field,
        base.field()
    )))
}

fn trace_json(trace: &Trace) -> serde_json::Value {
    serde_json::to_value(trace).expect("trace serialization")
}

fn index_message(mut n: u64, q: u64, rate: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(rate);
    for _ in 0..rate {
        out.push(n % q);
        n /= q;
    }
    out
}

fn load_network(path: &Path) -> Result<Network, CliError> {
    let bytes = read_file(path)?;
    Network::load(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load_code(path: &Path) -> Result<MulticastCode, CliError> {
    let bytes = read_file(path)?;
    MulticastCode::load(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("json output")
    );
}

fn parse_field(text: &str) -> Result<Field, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    let (p, k) = match parts.as_slice() {
        [p] => (p.trim(), "1"),
        [p, k] => (p.trim(), k.trim()),
        _ => {
            return Err(CliError::Usage(format!(
                "--field must be p or p,k, found {text:?}"
            )))
        }
    };
    let p =
        u64::from_str(p).map_err(|_| CliError::Usage(format!("bad field characteristic {p:?}")))?;
    let k = u32::from_str(k).map_err(|_| CliError::Usage(format!("bad field degree {k:?}")))?;
    Field::new(p, k).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_dims(text: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [d] => {
            let d = parse_one(d)?;
            Ok((d, d))
        }
        [lo, hi] => Ok((parse_one(lo)?, parse_one(hi)?)),
        _ => Err(CliError::Usage(format!(
            "--dims must be d or lo,hi, found {text:?}"
        ))),
    }
}

fn parse_one(text: &str) -> Result<usize, CliError> {
    usize::from_str(text.trim()).map_err(|_| CliError::Usage(format!("bad integer {text:?}")))
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',').map(parse_one).collect()
}

fn parse_u64_list(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(',')
        .map(|t| u64::from_str(t.trim()).map_err(|_| CliError::Usage(format!("bad integer {t:?}"))))
        .collect()
}
