//! Command-line front end. Exit codes: 0 success, 1 domain failure (bad
//! input, arbitrage, insufficient endowment), 2 resource cap, 3 failed
//! internal verification.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::buyer::{self, bid_price, build_buyer_sets, buyer_hedge, classify_vertices, verify_buyer_hedge, Membership};
use crate::error::Error;
use crate::geometry::json::{polyhedron_to_json, union_to_json};
use crate::geometry::{PolyUnion, Polyhedron};
use crate::market::{check_weak_na, Market, MartingalePair};
use crate::model::{parse_convention, Model};
use crate::oracle::{lp_ask, lp_bid, verify_pair};
use crate::policy::{RandomisedStoppingTime, DEFAULT_ENUMERATION_CAP};
use crate::rational::{approx, fmt_q, scale, unit, vec_to_json, Vector, Q};
use crate::seller::{
    ask_price, build_seller_sets, epigraph_section, seller_dual, seller_hedge, verify_seller_hedge, Convention,
    DualCertificate, Strategy,
};

#[derive(Parser, Debug)]
#[command(name = "superhedge", version, about = "Exact bid and ask prices of options under proportional transaction costs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Side {
    Ask,
    Bid,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Model file (JSON)
    model: PathBuf,
    /// Pricing asset, 1-based; defaults to the model's choice, else the last asset
    #[arg(long)]
    asset: Option<usize>,
    /// Order of rebalancing and settlement at exercise
    #[arg(long)]
    convention: Option<String>,
    /// Bound on stopping times enumerated and on pieces per union
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check weak no-arbitrage and print a witness martingale pair
    CheckNa {
        #[command(flatten)]
        common: Common,
    },
    /// Print the ask or bid price
    Price {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        side: Side,
        /// Recompute by brute force and require exact agreement
        #[arg(long)]
        oracle: bool,
    },
    /// Write a verified superhedging strategy (and stopping time for the bid side)
    Hedge {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        side: Side,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a dual certificate whose value equals the price
    Dual {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        side: Side,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the per-node sets of the pricing recursion
    ExportSets {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        side: Side,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Only this node
        #[arg(long)]
        node: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded(_) => 2,
            Error::Verification(_) => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn verification(message: String) -> Failure {
    Failure { code: 3, message }
}

struct Setup {
    model: Model,
    asset: usize,
    convention: Convention,
    piece_cap: usize,
    enum_cap: usize,
    seed: MartingalePair,
}

/// Loads the model and applies command-line overrides of the asset.
fn load(common: &Common) -> Result<(Model, usize), Failure> {
    let model = Model::load(&common.model)?;
    let d = model.market.d();
    let asset = match common.asset {
        None => model.asset,
        Some(a) if (1..=d).contains(&a) => a - 1,
        Some(a) => return Err(Error::InvalidModel(format!("--asset must be between 1 and {d}, found {a}")).into()),
    };
    Ok((model, asset))
}

fn setup(common: &Common) -> Result<Setup, Failure> {
    let (model, asset) = load(common)?;
    let convention = match &common.convention {
        Some(s) => parse_convention(s)?,
        None => model.convention,
    };
    let cap = common.cap.or(model.cap);
    let seed = check_weak_na(&model.market, asset).ok_or(Error::NoArbitrageViolated)?;
    Ok(Setup {
        asset,
        convention,
        piece_cap: cap.unwrap_or(buyer::DEFAULT_PIECE_CAP),
        enum_cap: cap.unwrap_or(DEFAULT_ENUMERATION_CAP),
        seed,
        model,
    })
}

/// `p/q ≈ decimal`, or just the integer.
pub fn render(x: &Q) -> String {
    if x.is_integer() {
        fmt_q(x)
    } else {
        format!("{} ≈ {}", fmt_q(x), approx(x, 6))
    }
}

fn ids(market: &Market) -> impl Iterator<Item = (usize, &str)> {
    (0..market.tree.len()).map(move |k| (k, market.tree.id(k)))
}

fn pair_json(market: &Market, pair: &MartingalePair, chi: Option<&RandomisedStoppingTime>) -> Value {
    let nodes: Vec<Value> = ids(market)
        .map(|(k, id)| {
            let mut v = json!({"id": id, "prob": fmt_q(&pair.prob[k]), "s": vec_to_json(&pair.s[k])});
            if let Some(c) = chi {
                v["chi"] = json!(fmt_q(&c.chi[k]));
            }
            v
        })
        .collect();
    json!(nodes)
}

fn strategy_json(market: &Market, y: &Strategy) -> Vec<Value> {
    ids(market)
        .map(|(k, id)| json!({"id": id, "holding": vec_to_json(y.holding(market, k)), "position": vec_to_json(&y.positions[k])}))
        .collect()
}

fn emit(out: &mut dyn Write, path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure { code: 1, message: e.to_string() };
    match path {
        Some(p) => std::fs::write(p, text).map_err(io),
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn ask_of(s: &Setup) -> Result<(crate::seller::SellerSets, Q), Failure> {
    let m = &s.model;
    let sets = build_seller_sets(&m.market, &m.payoff, &m.policy, s.convention)?;
    let ask = ask_price(&sets, s.asset)?;
    Ok((sets, ask))
}

fn bid_of(s: &Setup) -> Result<(buyer::BuyerSets, Q), Failure> {
    let m = &s.model;
    let sets = build_buyer_sets(&m.market, &m.payoff, &m.policy, s.piece_cap)?;
    let bid = bid_price(&sets, s.asset)?;
    Ok((sets, bid))
}

fn cmd_check_na(common: &Common, out: &mut dyn Write) -> Result<(), Failure> {
    let (model, asset) = load(common)?;
    let Some(pair) = check_weak_na(&model.market, asset) else {
        writeln!(out, "weak no-arbitrage fails").ok();
        return Err(Error::NoArbitrageViolated.into());
    };
    writeln!(out, "weak no-arbitrage holds").ok();
    let report = json!({"weak_no_arbitrage": true, "asset": asset + 1, "pair": pair_json(&model.market, &pair, None)});
    emit(out, &None, &pretty(&report))
}

fn cmd_price(common: &Common, side: Side, oracle: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let s = setup(common)?;
    let m = &s.model;
    let price = match side {
        Side::Ask => ask_of(&s)?.1,
        Side::Bid => bid_of(&s)?.1,
    };
    writeln!(out, "{}", render(&price)).ok();
    if oracle {
        let check = match side {
            Side::Ask if s.convention == Convention::Interchanged => {
                return Err(Error::Unsupported("the oracle covers the standard convention only".into()).into())
            }
            Side::Ask => lp_ask(&m.market, &m.payoff, &m.policy, s.asset)?,
            Side::Bid => lp_bid(&m.market, &m.payoff, &m.policy, s.asset, s.enum_cap)?.0,
        };
        if check != price {
            writeln!(out, "oracle: {} (MISMATCH)", render(&check)).ok();
            return Err(verification(format!("oracle gives {check}, recursion gives {price}")));
        }
        writeln!(out, "oracle: {} (agrees)", render(&check)).ok();
    }
    Ok(())
}

fn cmd_hedge(common: &Common, side: Side, path: &Option<PathBuf>, out: &mut dyn Write) -> Result<(), Failure> {
    let s = setup(common)?;
    let m = &s.model;
    let d = m.market.d();
    let report = match side {
        Side::Ask => {
            let (sets, ask) = ask_of(&s)?;
            let y = seller_hedge(&sets, &m.market, &m.policy, &ask, s.asset)?;
            verify_seller_hedge(&y, &m.market, &m.payoff, &m.policy).map_err(verification)?;
            json!({"side": "ask", "asset": s.asset + 1, "price": fmt_q(&ask), "nodes": strategy_json(&m.market, &y)})
        }
        Side::Bid => {
            let (sets, bid) = bid_of(&s)?;
            let h = buyer_hedge(&sets, &m.market, &m.policy, &scale(&-bid.clone(), &unit(d, s.asset)))?;
            verify_buyer_hedge(&h, &m.market, &m.payoff, &m.policy).map_err(verification)?;
            let mut nodes = strategy_json(&m.market, &h.strategy);
            for (k, v) in nodes.iter_mut().enumerate() {
                v["stop"] = json!(h.tau.stop[k]);
            }
            json!({"side": "bid", "asset": s.asset + 1, "price": fmt_q(&bid), "nodes": nodes})
        }
    };
    emit(out, path, &pretty(&report))
}

fn certificate_json(market: &Market, side: &str, asset: usize, price: &Q, cert: &DualCertificate) -> Value {
    json!({
        "side": side,
        "asset": asset + 1,
        "price": fmt_q(price),
        "value": fmt_q(&cert.value),
        "nodes": pair_json(market, &cert.pair, Some(&cert.chi)),
    })
}

fn cmd_dual(common: &Common, side: Side, path: &Option<PathBuf>, out: &mut dyn Write) -> Result<(), Failure> {
    let s = setup(common)?;
    let m = &s.model;
    let report = match side {
        Side::Ask => {
            let (sets, ask) = ask_of(&s)?;
            let cert = seller_dual(&sets, &m.market, &m.payoff, &m.policy, s.asset, &s.seed)?;
            verify_pair(&m.market, &cert.pair, &cert.chi, Some(s.asset)).map_err(verification)?;
            if cert.value != ask {
                return Err(verification(format!("certificate value {} differs from ask {ask}", cert.value)));
            }
            certificate_json(&m.market, "ask", s.asset, &ask, &cert)
        }
        Side::Bid => {
            let (bid, hedge, cert) =
                buyer::price_and_certify(&m.market, &m.payoff, &m.policy, s.asset, &s.seed, s.piece_cap)?;
            verify_pair(&m.market, &cert.pair, &hedge.tau.to_randomised(), Some(s.asset)).map_err(verification)?;
            if cert.value != bid {
                return Err(verification(format!("certificate value {} differs from bid {bid}", cert.value)));
            }
            certificate_json(&m.market, "bid", s.asset, &bid, &cert)
        }
    };
    emit(out, path, &pretty(&report))
}

/// Vertices and rays of the slice `s^i = 1` of the support-function epigraph
/// of `-A`, as points `(s^j for j ≠ i, -value)`.
fn dual_section(a: &Polyhedron, i: usize) -> (Vec<Vector>, Vec<Vector>) {
    let sec = epigraph_section(a, i);
    let flip = |v: &Vector| -> Vector {
        let mut p: Vector = v[1..].iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()).collect();
        p.push(-v[0].clone());
        p
    };
    (sec.vertices().iter().map(flip).collect(), sec.all_rays().iter().map(flip).collect())
}

struct ExportRow {
    node: String,
    set: String,
    piece: Option<usize>,
    kind: &'static str,
    coords: Vector,
}

fn polyhedron_rows(rows: &mut Vec<ExportRow>, node: &str, set: &str, piece: Option<usize>, p: &Polyhedron) {
    let mut push = |kind, coords: &Vector| {
        rows.push(ExportRow { node: node.into(), set: set.into(), piece, kind, coords: coords.clone() })
    };
    if p.is_empty() {
        push("empty", &Vec::new());
        return;
    }
    if p.is_full() {
        push("full-space", &Vec::new());
        return;
    }
    for v in p.vertices() {
        push("vertex", v);
    }
    for r in p.all_rays() {
        push("ray", &r);
    }
}

fn union_rows(rows: &mut Vec<ExportRow>, node: &str, set: &str, u: &PolyUnion) {
    if u.is_empty() {
        rows.push(ExportRow { node: node.into(), set: set.into(), piece: None, kind: "empty", coords: Vec::new() });
    }
    for (k, p) in u.pieces().iter().enumerate() {
        polyhedron_rows(rows, node, set, Some(k), p);
    }
}

fn section_json(vertices: &[Vector], rays: &[Vector]) -> Value {
    json!({
        "vertices": vertices.iter().map(|v| vec_to_json(v)).collect::<Vec<_>>(),
        "rays": rays.iter().map(|v| vec_to_json(v)).collect::<Vec<_>>(),
    })
}

fn membership_name(m: Membership) -> &'static str {
    match m {
        Membership::OnlyU => "U",
        Membership::OnlyV => "V",
        Membership::Both => "both",
    }
}

fn cmd_export(
    common: &Common,
    side: Side,
    format: Format,
    node: &Option<String>,
    path: &Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let s = setup(common)?;
    let m = &s.model;
    let market = &m.market;
    let selected: Vec<usize> = match node {
        None => (0..market.tree.len()).collect(),
        Some(id) => vec![market
            .tree
            .index_of(id)
            .ok_or_else(|| Error::InvalidModel(format!("unknown node `{id}`")))?],
    };
    let mut json_nodes = Vec::new();
    let mut rows = Vec::new();
    match side {
        Side::Ask => {
            let (sets, _) = ask_of(&s)?;
            for &k in &selected {
                let id = market.tree.id(k);
                let named = [("U", &sets.u[k]), ("V", &sets.v[k]), ("W", &sets.w[k]), ("Z", &sets.z[k])];
                let mut entry = json!({"id": id});
                for (name, p) in named {
                    entry[name] = polyhedron_to_json(p);
                    polyhedron_rows(&mut rows, id, name, None, p);
                }
                let (sv, sr) = dual_section(&sets.z[k], s.asset);
                entry["Z_dual_section"] = section_json(&sv, &sr);
                for v in &sv {
                    rows.push(ExportRow { node: id.into(), set: "Z".into(), piece: None, kind: "section_vertex", coords: v.clone() });
                }
                for r in &sr {
                    rows.push(ExportRow { node: id.into(), set: "Z".into(), piece: None, kind: "section_ray", coords: r.clone() });
                }
                json_nodes.push(entry);
            }
        }
        Side::Bid => {
            let (sets, _) = bid_of(&s)?;
            for &k in &selected {
                let id = market.tree.id(k);
                let named = [("U", &sets.u[k]), ("V", &sets.v[k]), ("W", &sets.w[k]), ("Z", &sets.z[k])];
                let mut entry = json!({"id": id});
                for (name, u) in named {
                    entry[name] = union_to_json(u);
                    union_rows(&mut rows, id, name, u);
                }
                let corners = classify_vertices(&sets, k);
                entry["Z_corners"] = json!(corners
                    .iter()
                    .map(|(v, t)| json!({"point": vec_to_json(v), "in": membership_name(*t)}))
                    .collect::<Vec<_>>());
                for (v, t) in corners {
                    let kind = match t {
                        Membership::OnlyU => "corner_U",
                        Membership::OnlyV => "corner_V",
                        Membership::Both => "corner_both",
                    };
                    rows.push(ExportRow { node: id.into(), set: "Z".into(), piece: None, kind, coords: v });
                }
                json_nodes.push(entry);
            }
        }
    }
    let text = match format {
        Format::Json => pretty(&json!({
            "side": if side == Side::Ask { "ask" } else { "bid" },
            "asset": s.asset + 1,
            "nodes": json_nodes,
        })),
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
            let mut header = vec!["node".to_string(), "set".into(), "piece".into(), "kind".into()];
            header.extend((1..=market.d()).map(|j| format!("x{j}")));
            let csv_err = |e: csv::Error| Failure { code: 1, message: e.to_string() };
            w.write_record(&header).map_err(csv_err)?;
            for r in rows {
                let mut rec = vec![r.node, r.set, r.piece.map(|p| p.to_string()).unwrap_or_default(), r.kind.to_string()];
                rec.extend(r.coords.iter().map(fmt_q));
                w.write_record(&rec).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Failure { code: 1, message: e.to_string() })?;
            String::from_utf8(bytes).expect("utf-8")
        }
    };
    emit(out, path, &text)
}

/// Runs the command line `args` (including the program name), writing normal
/// output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                write!(out, "{text}").ok();
            } else {
                write!(err, "{text}").ok();
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::CheckNa { common } => cmd_check_na(common, out),
        Command::Price { common, side, oracle } => cmd_price(common, *side, *oracle, out),
        Command::Hedge { common, side, out: path } => cmd_hedge(common, *side, path, out),
        Command::Dual { common, side, out: path } => cmd_dual(common, *side, path, out),
        Command::ExportSets { common, side, format, node, out: path } => cmd_export(common, *side, *format, node, path, out),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            writeln!(err, "error: {}", f.message).ok();
            f.code
        }
    }
}
