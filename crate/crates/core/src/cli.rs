//! The `psetdisc` command line.
//!
//! Output is `#`-prefixed metadata (version, command line, caps in force)
//! followed by `key=value` lines or CSV. Floats are printed in the shortest
//! form that parses back to the same `f64`, so every value round-trips and
//! identical flags give byte-identical output.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 computational cap
//! exceeded, 3 invariant violation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{n_min_from_bound, thm1_bound_with_limits, thm2_bound, thm2_exponent, thm2_params};
use crate::discrepancy::{star_discrepancy_exact_with_limits, weighted_star_discrepancy_exact_with_limits, Side};
use crate::error::{Error, Result};
use crate::expsum::{
    check_sum_bound, hua_wang_double_sum, korobov_sum, niederreiter_rhs_with_limits, root_count,
    weighted_niederreiter_rhs_with_limits, FrequencyVector, SumLemma,
};
use crate::limits::Limits;
use crate::numtheory::Prime;
use crate::pointset::{generate_with_limits, PSetKind, RationalPointSet};
use crate::qmc::{convergence_table_with_limits, ProductIntegrand};
use crate::weights::{parse_weights, Weights};

#[derive(Parser, Debug)]
#[command(name = "psetdisc", version, about = "Korobov and Hua–Wang p-sets: discrepancy, exponential sums, bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the points of a p-set as CSV.
    Gen {
        #[command(flatten)]
        set: SetArgs,
        /// Print coordinates as fractions n/M.
        #[arg(long)]
        exact: bool,
    },
    /// Exact star discrepancy and a witness corner.
    Disc(SetArgs),
    /// Exact weighted star discrepancy and the maximizing subset.
    Wdisc {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        weights: PathBuf,
    },
    /// Evaluate one Korobov or Hua–Wang exponential sum.
    Sum {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        s: usize,
        /// Frequencies h1,...,hs.
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        #[arg(long, default_value_t = 1)]
        mod_power: u32,
        /// Hua–Wang double sum instead of the Korobov sum.
        #[arg(long)]
        double: bool,
    },
    /// Verify an exponential-sum bound over all admissible frequencies.
    CheckWeil {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        s: usize,
        /// 3 (mod p), 5 (mod p^2) or 6 (double sum).
        #[arg(long)]
        lemma: u32,
        /// Frequency vectors to enumerate before switching to sampling.
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a discrepancy bound.
    Bound {
        #[arg(long, value_enum)]
        thm: BoundKind,
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Smallest prime whose dimension-free bound reaches eps.
    Nmin {
        #[arg(long, value_parser = parse_kind)]
        kind: PSetKind,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        t: Option<f64>,
    },
    /// QMC convergence table for a product integrand.
    Integrate {
        #[arg(long, value_parser = parse_kind)]
        kind: PSetKind,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        primes: String,
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
    },
    /// Exact value, niederreiter-type bound, closed form and envelope in one row.
    Chain {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        t: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct SetArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: PSetKind,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    s: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BoundKind {
    #[value(name = "1")]
    Thm1,
    #[value(name = "2")]
    Thm2,
    Lemma1,
    Lemma2,
}

fn parse_kind(s: &str) -> std::result::Result<PSetKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } | Error::Overflow(_) => 2,
        Error::Invariant(_) => 3,
        _ => 1,
    }
}

/// Shortest round-trip rendering; scientific outside `[1e-5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad {what} entry {t:?}")))
        })
        .collect()
}

fn read_weights(path: &PathBuf) -> Result<Weights> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_weights(&text)
}

struct Ctx {
    limits: Limits,
    out: String,
    err: String,
}

impl Ctx {
    fn line(&mut self, text: impl AsRef<str>) {
        self.out.push_str(text.as_ref());
        self.out.push('\n');
    }

    fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.out, "{key}={value}");
    }

    fn kf(&mut self, key: &str, value: f64) {
        self.kv(key, fmt_f64(value));
    }
}

/// Runs the command line `args` (program name first) and captures its output.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let mut ctx = Ctx {
        limits: Limits::from_env(),
        out: String::new(),
        err: String::new(),
    };
    let command_line = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let l = ctx.limits.clone();
    ctx.line(format!("# psetdisc {}", env!("CARGO_PKG_VERSION")));
    ctx.line(format!("# command: {command_line}"));
    ctx.line(format!(
        "# caps: max_entries={} max_corner_ops={} max_frequencies={} max_subset_dim={}",
        l.max_entries, l.max_corner_ops, l.max_frequencies, l.max_subset_dim
    ));
    match execute(&mut ctx, cli.command) {
        Ok(code) => Outcome {
            code,
            stdout: ctx.out,
            stderr: ctx.err,
        },
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {e}");
            Outcome {
                code: exit_code(&e),
                stdout: ctx.out,
                stderr: ctx.err,
            }
        }
    }
}

fn point_set(ctx: &Ctx, set: &SetArgs) -> Result<RationalPointSet> {
    generate_with_limits(set.kind, Prime::new(set.p)?, set.s, &ctx.limits)
}

fn fraction(num: u64, m: u64) -> String {
    format!("{num}/{m}")
}

fn execute(ctx: &mut Ctx, command: Command) -> Result<i32> {
    match command {
        Command::Gen { set, exact } => {
            let ps = point_set(ctx, &set)?;
            let m = ps.modulus();
            let header: Vec<String> = (1..=ps.dim()).map(|j| format!("x{j}")).collect();
            ctx.line(header.join(","));
            let rows: Vec<String> = ps
                .points()
                .map(|x| {
                    let cells: Vec<String> = x
                        .iter()
                        .map(|&v| if exact { fraction(v, m) } else { fmt_f64(v as f64 / m as f64) })
                        .collect();
                    cells.join(",")
                })
                .collect();
            for row in rows {
                ctx.line(row);
            }
        }
        Command::Disc(set) => {
            let ps = point_set(ctx, &set)?;
            let r = star_discrepancy_exact_with_limits(&ps, &ctx.limits)?;
            ctx.kf("dstar", r.value);
            if let Some(q) = r.exact {
                ctx.kv("dstar_exact", q);
            }
            let w: Vec<String> = r
                .witness
                .numerators
                .iter()
                .map(|&v| fraction(v, r.witness.modulus))
                .collect();
            ctx.kv("witness", w.join(","));
            ctx.kv("side", side_label(r.side));
            ctx.kv("points", ps.len());
        }
        Command::Wdisc { set, weights } => {
            let w = read_weights(&weights)?;
            let ps = point_set(ctx, &set)?;
            let r = weighted_star_discrepancy_exact_with_limits(&ps, &w, &ctx.limits)?;
            ctx.kf("wdstar", r.value);
            match (&r.subset, &r.projected, r.full_witness(ps.dim())) {
                (Some(u), Some(d), Some(corner)) => {
                    ctx.kv("subset", u);
                    ctx.kf("dstar_projected", d.value);
                    let cells: Vec<String> = corner
                        .numerators
                        .iter()
                        .map(|&v| fraction(v, corner.modulus))
                        .collect();
                    ctx.kv("witness", cells.join(","));
                    ctx.kv("side", side_label(d.side));
                }
                _ => ctx.kv("subset", "none"),
            }
        }
        Command::Sum {
            p,
            s,
            h,
            mod_power,
            double,
        } => {
            let p = Prime::new(p)?;
            let entries: Vec<i64> = parse_list(&h, "frequency")?;
            if entries.len() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    got: entries.len(),
                });
            }
            let v = if double {
                if mod_power != 1 {
                    return Err(Error::invalid("--double works modulo p only"));
                }
                let hv = FrequencyVector::new(entries.clone(), p.get())?;
                hua_wang_double_sum(&hv, p)?
            } else {
                let m = p
                    .get()
                    .checked_pow(mod_power)
                    .ok_or_else(|| Error::Overflow(format!("{p}^{mod_power}")))?;
                korobov_sum(&FrequencyVector::new(entries.clone(), m)?, p, mod_power)?
            };
            ctx.kf("re", v.re);
            ctx.kf("im", v.im);
            ctx.kf("magnitude", v.magnitude());
            ctx.kv("terms", v.terms);
            if double {
                ctx.kv("root_count", root_count(&entries, p));
            }
        }
        Command::CheckWeil {
            p,
            s,
            lemma,
            cap,
            seed,
        } => {
            let lemma = SumLemma::from_number(lemma)?;
            let cap = cap.unwrap_or(ctx.limits.max_frequencies);
            let r = check_sum_bound(lemma, Prime::new(p)?, s, cap, seed)?;
            ctx.line(format!("max_ratio={:.6} worst_h={}", r.max_ratio, join(&r.worst_h)));
            ctx.kf("max_magnitude", r.max_magnitude);
            ctx.kf("bound", r.bound);
            ctx.kv("modulus", r.modulus);
            ctx.kv("checked", r.checked);
            ctx.kv("violations", r.violations);
            ctx.kv("mode", if r.exhaustive { "exhaustive" } else { "sampled" });
            if r.violations > 0 {
                let _ = writeln!(
                    ctx.err,
                    "error: {} frequency vectors exceed the bound {} (max magnitude {} at h={})",
                    r.violations,
                    fmt_f64(r.bound),
                    fmt_f64(r.max_magnitude),
                    join(&r.worst_h)
                );
                return Ok(3);
            }
        }
        Command::Bound {
            thm,
            set,
            weights,
            delta,
            t,
        } => {
            ctx.line("# log: natural");
            let weights = weights.as_ref().map(read_weights).transpose()?;
            let need_weights = || weights.clone().ok_or_else(|| Error::invalid("--weights is required"));
            let p = Prime::new(set.p)?;
            let value = match thm {
                BoundKind::Thm1 => {
                    let w = need_weights()?;
                    let r = thm1_bound_with_limits(set.kind, p, set.s, &w, &ctx.limits)?;
                    ctx.kf("value", r.value);
                    ctx.kv("subset", &r.maximizing_subset);
                    for (name, v) in &r.constants {
                        ctx.kf(name, *v);
                    }
                    r.value
                }
                BoundKind::Thm2 => {
                    let w = need_weights()?;
                    let delta = delta.ok_or_else(|| Error::invalid("--delta is required"))?;
                    let params = thm2_params(&w, delta, t)?;
                    let v = thm2_bound(set.kind, p, set.s, &params)?;
                    ctx.kf("value", v);
                    ctx.kv("k0", params.k0);
                    ctx.kf("threshold", params.threshold);
                    ctx.kf("gamma0", params.gamma0);
                    ctx.kf("gamma_k0", params.gamma_k0);
                    ctx.kf("c", params.constant(set.kind));
                    ctx.kf("exponent", thm2_exponent(set.kind, delta));
                    v
                }
                BoundKind::Lemma1 => {
                    let ps = point_set(ctx, &set)?;
                    let r = niederreiter_rhs_with_limits(&ps, &ctx.limits)?;
                    ctx.kf("value", r.value);
                    ctx.kf("count_term", r.count_term);
                    ctx.kf("frequency_sum", r.frequency_sum);
                    r.value
                }
                BoundKind::Lemma2 => {
                    let w = need_weights()?;
                    let ps = point_set(ctx, &set)?;
                    let r = weighted_niederreiter_rhs_with_limits(&ps, &w, &ctx.limits)?;
                    ctx.kf("value", r.value);
                    ctx.kf("count_term", r.count_term);
                    ctx.kv("count_subset", subset_label(r.count_subset.as_ref()));
                    ctx.kf("frequency_term", r.frequency_term);
                    ctx.kv("frequency_subset", subset_label(r.frequency_subset.as_ref()));
                    r.value
                }
            };
            ctx.line("thm,kind,p,s,value");
            let name = thm.to_possible_value().expect("no skipped variants");
            ctx.line(format!("{},{},{},{},{}", name.get_name(), set.kind, set.p, set.s, fmt_f64(value)));
        }
        Command::Nmin {
            kind,
            eps,
            s,
            weights,
            delta,
            t,
        } => {
            ctx.line("# log: natural");
            let w = read_weights(&weights)?;
            let r = n_min_from_bound(kind, eps, s, &w, delta, t)?;
            ctx.kv("M", &r.m);
            ctx.kv("p", &r.p);
            ctx.kv("points", &r.points);
            ctx.kf("bound", r.bound);
            ctx.kv("k0", r.params.k0);
            ctx.kf("c", r.params.constant(kind));
        }
        Command::Integrate {
            kind,
            s,
            primes,
            coeffs,
        } => {
            let primes = parse_list::<u64>(&primes, "prime")?
                .into_iter()
                .map(Prime::new)
                .collect::<Result<Vec<_>>>()?;
            let f = ProductIntegrand::new(parse_list(&coeffs, "coefficient")?)?;
            if f.dim() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    got: f.dim(),
                });
            }
            let rows = convergence_table_with_limits(kind, s, &f, &primes, &ctx.limits)?;
            ctx.line("p,n,estimate,abs_error,dstar,kh_bound,kh_source");
            for r in rows {
                ctx.line(format!(
                    "{},{},{},{},{},{},{}",
                    r.p,
                    r.n,
                    fmt_f64(r.estimate),
                    fmt_f64(r.abs_error),
                    r.dstar.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(r.kh_bound),
                    r.kh_source.label()
                ));
            }
        }
        Command::Chain {
            set,
            weights,
            delta,
            t,
        } => {
            ctx.line("# log: natural");
            let w = read_weights(&weights)?;
            let p = Prime::new(set.p)?;
            let params = thm2_params(&w, delta, t)?;
            let ps = point_set(ctx, &set)?;
            let exact = weighted_star_discrepancy_exact_with_limits(&ps, &w, &ctx.limits)?.value;
            let lemma2 = weighted_niederreiter_rhs_with_limits(&ps, &w, &ctx.limits)?.value;
            let thm1 = thm1_bound_with_limits(set.kind, p, set.s, &w, &ctx.limits)?.value;
            let thm2 = thm2_bound(set.kind, p, set.s, &params)?;
            let ok = exact <= lemma2 && lemma2 <= thm1 && thm1 <= thm2;
            ctx.line("kind,p,s,exact,lemma2,thm1,thm2,dominance");
            ctx.line(format!(
                "{},{},{},{},{},{},{},{}",
                set.kind,
                set.p,
                set.s,
                fmt_f64(exact),
                fmt_f64(lemma2),
                fmt_f64(thm1),
                fmt_f64(thm2),
                if ok { "PASS" } else { "FAIL" }
            ));
            if !ok {
                let _ = writeln!(ctx.err, "error: dominance chain fails for {} p={} s={}", set.kind, set.p, set.s);
                return Ok(3);
            }
        }
    }
    Ok(0)
}

fn side_label(side: Side) -> &'static str {
    match side {
        Side::Closed => "closed",
        Side::Open => "open",
    }
}

fn subset_label(u: Option<&crate::subset::Subset>) -> String {
    u.map_or_else(|| "none".to_string(), |u| u.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        run(std::iter::once("psetdisc").chain(args.iter().copied()))
    }

    fn body(o: &Outcome) -> Vec<&str> {
        o.stdout.lines().filter(|l| !l.starts_with('#')).collect()
    }

    #[test]
    fn formatting_round_trips() {
        for x in [0.2, 1.0 / 3.0, 1e-30, 12376000000000000.0, 0.0, 5.75, -2.5e20] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.2), "0.2");
    }

    #[test]
    fn gen_exact() {
        let o = run_args(&["gen", "--kind", "P", "--p", "5", "--s", "2", "--exact"]);
        assert_eq!(o.code, 0);
        assert_eq!(body(&o), vec!["x1,x2", "0/5,0/5", "1/5,1/5", "2/5,4/5", "3/5,4/5", "4/5,1/5"]);
    }

    #[test]
    fn disc_one_dimensional() {
        let o = run_args(&["disc", "--kind", "P", "--p", "5", "--s", "1"]);
        assert_eq!(o.code, 0);
        assert_eq!(body(&o)[0], "dstar=0.2");
        assert!(o.stdout.contains("dstar_exact=1/5"));
    }

    #[test]
    fn check_weil_first_line() {
        let o = run_args(&["check-weil", "--p", "5", "--s", "2", "--lemma", "3"]);
        assert_eq!(o.code, 0);
        assert!(body(&o)[0].starts_with("max_ratio=1.000000 worst_h="));
    }

    #[test]
    fn usage_and_domain_errors() {
        assert_eq!(run_args(&["frobnicate"]).code, 1);
        assert_eq!(run_args(&["disc", "--kind", "X", "--p", "5", "--s", "1"]).code, 1);
        assert_eq!(run_args(&["disc", "--kind", "P", "--p", "6", "--s", "1"]).code, 1);
        assert_eq!(run_args(&["--help"]).code, 0);
    }

    #[test]
    fn sum_with_negative_frequencies() {
        let o = run_args(&["sum", "--p", "5", "--s", "2", "--h", "-2,1"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let mag: f64 = o
            .stdout
            .lines()
            .find_map(|l| l.strip_prefix("magnitude="))
            .unwrap()
            .parse()
            .unwrap();
        assert!((mag - 5f64.sqrt()).abs() < 1e-9);
    }
}
