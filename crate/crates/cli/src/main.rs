use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use cfpgn::{
    brute_minima, build_graph, decode, format_rational, normalize, parse_rational, render_svg,
    verify_one, CfExpansion, ConvergentTable, Error, LogCoord, Rational, RenderConfig,
    VerifyOptions, DEFAULT_DEPTH,
};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::json;

/// Combined graphs of successive minima and the continued fractions they encode.
#[derive(Parser)]
#[command(name = "cfpgn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct XiArg {
    /// Rational number as p/q, an integer or a finite decimal.
    #[arg(allow_hyphen_values = true, required_unless_present = "quotients")]
    xi: Option<String>,
    /// Partial quotients a1,a2,... of a value in [0, 1/2].
    #[arg(long, value_delimiter = ',', conflicts_with = "xi")]
    quotients: Option<Vec<String>>,
}

impl XiArg {
    fn value(&self) -> anyhow::Result<Rational> {
        if let Some(qs) = &self.quotients {
            let qs = qs
                .iter()
                .map(|a| {
                    a.trim()
                        .parse::<BigInt>()
                        .with_context(|| format!("bad partial quotient {a:?}"))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            return Ok(CfExpansion::from_quotients(qs)?.value().clone());
        }
        let text = self.xi.as_deref().expect("clap requires xi or --quotients");
        Ok(parse_rational(text)?)
    }
}

#[derive(Args)]
struct DepthArg {
    /// Number of complete intervals to build.
    #[arg(long, env = "CFPGN_DEPTH", default_value_t = DEFAULT_DEPTH)]
    depth: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize and print the continued fraction with its convergents.
    Expand {
        #[command(flatten)]
        xi: XiArg,
    },
    /// Build the combined graph and print it as JSON or write it as SVG.
    Graph {
        #[command(flatten)]
        xi: XiArg,
        #[command(flatten)]
        depth: DepthArg,
        #[arg(long, conflicts_with = "svg")]
        json: bool,
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// Read the continued fraction back from the graph and compare with the expansion.
    Decode {
        #[command(flatten)]
        xi: XiArg,
        #[command(flatten)]
        depth: DepthArg,
    },
    /// Brute-force successive minima at q = ½·log(r).
    Oracle {
        #[command(flatten)]
        xi: XiArg,
        /// The ratio r, as p/q.
        #[arg(long)]
        q_ratio: String,
    },
    /// Run every invariant check for one value.
    Verify {
        #[command(flatten)]
        xi: XiArg,
        #[command(flatten)]
        depth: DepthArg,
        /// Extra random abscissae compared against the oracle.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        /// Largest |Q| scanned for points better than the second-to-last convergent.
        #[arg(long)]
        bound: Option<BigInt>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Verify many reduced fractions in [0, 1/2].
    Fuzz {
        #[arg(long)]
        max_den: u64,
        /// Number of distinct values to sample; all of them when omitted.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        skip_oracle: bool,
    },
    /// Draw the combined graph as SVG.
    Render {
        #[command(flatten)]
        xi: XiArg,
        #[command(flatten)]
        depth: DepthArg,
        #[arg(short, long)]
        output: PathBuf,
        /// Right end of the plot window.
        #[arg(long)]
        qmax: Option<f64>,
        /// Draw the trajectories of the points carrying the graph.
        #[arg(long)]
        trajectories: bool,
        #[arg(long, default_value_t = 640)]
        width: u32,
        #[arg(long, default_value_t = 400)]
        height: u32,
        #[arg(long)]
        no_labels: bool,
    },
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    let written = serde_json::to_writer_pretty(&mut out, value)
        .map_err(std::io::Error::from)
        .and_then(|()| writeln!(out));
    match written {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Expand { xi } => {
            let input = xi.value()?;
            let norm = normalize(&input);
            let cf = CfExpansion::expand(&norm)?;
            let table = ConvergentTable::new(&cf);
            print_json(&json!({
                "input": format_rational(&input),
                "normalized": format_rational(&norm),
                "quotients": cf.quotients().iter().map(ToString::to_string).collect::<Vec<_>>(),
                "bracket": cf.bracket(),
                "convergents": serde_json::to_value(&table)?["convergents"].take(),
            }))?;
        }
        Command::Graph {
            xi,
            depth,
            json: _,
            svg,
        } => {
            let graph = build_graph(&xi.value()?, Some(depth.depth));
            match svg {
                Some(path) => {
                    let doc = render_svg(&graph, &RenderConfig::for_graph(&graph))?;
                    std::fs::write(&path, doc)
                        .with_context(|| format!("writing {}", path.display()))?;
                }
                None => print_json(&graph)?,
            }
        }
        Command::Decode { xi, depth } => {
            let norm = normalize(&xi.value()?);
            let expanded = CfExpansion::expand(&norm)?;
            println!("expanded: {}", expanded.bracket());
            match decode(&build_graph(&norm, Some(depth.depth))) {
                Ok(decoded) => {
                    println!("decoded:  {}", decoded.bracket());
                    if decoded != expanded {
                        eprintln!("error: decoded expansion differs from the expansion");
                        return Ok(false);
                    }
                }
                Err(Error::Truncated { prefix }) => {
                    println!(
                        "decoded:  [0;{},...] (truncated at depth {})",
                        prefix.join(","),
                        depth.depth
                    );
                    eprintln!("error: graph truncated; raise --depth or CFPGN_DEPTH");
                    return Ok(false);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Oracle { xi, q_ratio } => {
            let norm = normalize(&xi.value()?);
            let r = parse_rational(&q_ratio)?;
            let q = LogCoord::new(r)?;
            if q < LogCoord::zero() {
                bail!("q must be non-negative: the ratio must be at least 1");
            }
            print_json(&json!({
                "xi": format_rational(&norm),
                "q": q,
                "minima": brute_minima(&norm, &q, None),
            }))?;
        }
        Command::Verify {
            xi,
            depth,
            samples,
            bound,
            seed,
            json,
        } => {
            let opts = VerifyOptions {
                samples,
                oracle_bound: bound,
                seed,
                skip_oracle: false,
                depth: Some(depth.depth),
            };
            let report = verify_one(&xi.value()?, &opts);
            if json {
                print_json(&report)?;
            } else {
                println!(
                    "xi = {} (normalized {}), quotients [{}]",
                    report.xi,
                    report.normalized,
                    report.quotients.join(",")
                );
                for c in &report.checks {
                    println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
                    if let Some(cx) = &c.counterexample {
                        println!("     counterexample: {cx}");
                    }
                }
                println!(
                    "{} oracle samples, {:.3}s",
                    report.oracle_samples,
                    report.elapsed.as_secs_f64()
                );
            }
            return Ok(report.passed());
        }
        Command::Fuzz {
            max_den,
            count,
            seed,
            skip_oracle,
        } => {
            if max_den < 2 {
                bail!("--max-den must be at least 2");
            }
            let opts = VerifyOptions {
                seed,
                skip_oracle,
                ..Default::default()
            };
            let summary = cfpgn::fuzz(max_den, count, &opts);
            for r in summary.reports.iter().filter(|r| !r.passed()) {
                for c in r.failures() {
                    eprintln!(
                        "FAIL {} {}: {}",
                        r.xi,
                        c.name,
                        c.counterexample.clone().unwrap_or_default()
                    );
                }
            }
            print_json(&summary)?;
            return Ok(summary.failures == 0);
        }
        Command::Render {
            xi,
            depth,
            output,
            qmax,
            trajectories,
            width,
            height,
            no_labels,
        } => {
            let graph = build_graph(&xi.value()?, Some(depth.depth));
            let mut cfg = RenderConfig::for_graph(&graph);
            if let Some(q) = qmax {
                cfg.q_max = q;
            }
            cfg.show_trajectories = trajectories;
            cfg.width = width;
            cfg.height = height;
            cfg.show_q_labels = !no_labels;
            let doc = render_svg(&graph, &cfg)?;
            std::fs::write(&output, doc)
                .with_context(|| format!("writing {}", output.display()))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
