//! `hks`: Hilbert-Kunz functions, series and multiplicities from the command
//! line.

mod cache;
mod expr;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hkfractal::coherent::l_of;
use hkfractal::colength::{colength_dense, colength_homogeneous, direct_en, DenseLimit};
use hkfractal::engine::{
    discover_rules, en_dot, hk_multiplicity, hks_sum, parse_rules_file, solve_r_system,
};
use hkfractal::oracle::oracle_mul;
use hkfractal::rational::fmt_q;
use hkfractal::zdh::{en_zd, fit_mu_with, ZDInput};
use hkfractal::{Error, GammaVec, GridFn, Poly, Prime, RatFunc, RuleSystem, Q};
use serde_json::{json, Value};

use cache::Cache;
use expr::{parse_poly, parse_series, Summand};

#[derive(Parser)]
#[command(name = "hks", version, about = "Exact Hilbert-Kunz series over prime fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Directory holding the persistent colength cache.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Largest q^s handled by dense elimination.
    #[arg(long, global = true)]
    dense_limit: Option<usize>,
    /// Recompute cached colengths and fail on any disagreement.
    #[arg(long, global = true)]
    verify: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Table of e_n(f) for n = 0..=n-max.
    En {
        #[arg(long)]
        p: u64,
        poly: String,
        #[arg(long, default_value_t = 3)]
        n_max: u32,
    },
    /// Samples of φ_f on the grid of denominator p^depth.
    Phi {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        poly: String,
    },
    /// Discover the shift rules of 𝓛(φ_f).
    Discover {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        poly: String,
        /// Name of the root member.
        #[arg(long, default_value = "a")]
        name: String,
        #[arg(long)]
        rules_out: Option<PathBuf>,
    },
    /// Hilbert-Kunz series of a sum such as "f=<poly>; g=<poly>; f+g".
    Series {
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        /// Sum expression; omit when the rules come from --rules-in.
        expr: Option<String>,
        #[arg(long)]
        rules_in: Option<PathBuf>,
        #[arg(long)]
        rules_out: Option<PathBuf>,
    },
    /// Hilbert-Kunz multiplicity from a series (JSON text, a file written by
    /// `series --json`, or a sum expression).
    Mult {
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        input: Option<String>,
        #[arg(long)]
        rules_in: Option<PathBuf>,
    },
    /// Analyzer for z^D - h(x, y).
    Zd {
        #[arg(long)]
        p: u64,
        #[arg(long = "D")]
        d: u64,
        h: String,
        /// Lowest n (default c = v_p(D)).
        #[arg(long)]
        n_min: Option<u32>,
        /// Highest n; widened as needed to determine μ and μ₁.
        #[arg(long)]
        n_max: Option<u32>,
        /// Assert that E divides no exponent of h's factorization (forces μ₁ = 0).
        #[arg(long)]
        e_avoids_exponents: bool,
    },
    /// Product of λ-basis elements, e.g. `gamma --p 3 L3 L3`.
    Gamma {
        #[arg(long)]
        p: u64,
        #[arg(required = true)]
        factors: Vec<String>,
        /// Apply θ to the product.
        #[arg(long)]
        theta: bool,
        /// Apply ψ to the product.
        #[arg(long)]
        psi: bool,
    },
    /// Run the built-in oracle cross-checks.
    Selfcheck,
}

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Compute(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

struct Output {
    json: Value,
    text: String,
}

struct Ctx {
    cache: Cache,
    limit: DenseLimit,
}

fn prime(p: u64) -> Run<Prime> {
    Prime::new(p).map_err(|e| Failure::Usage(e.to_string()))
}

fn read_file(path: &PathBuf) -> Run<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &PathBuf, text: &str) -> Run<()> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn coeff_json(c: &Q) -> Value {
    match c.is_integer().then(|| c.numer().to_string().parse::<i64>().ok()).flatten() {
        Some(n) => json!(n),
        None => json!(fmt_q(c)),
    }
}

impl Ctx {
    fn grid(&mut self, f: &Poly, depth: u32) -> Run<GridFn> {
        let p = f.modulus();
        let q = p.pow(depth).ok_or_else(|| Failure::Usage(format!("{p}^{depth} overflows")))?;
        let table = self.cache.table(q, f, q, self.limit)?;
        Ok(GridFn::from_table(&table, f.nvars())?)
    }

    fn summand_grid(&mut self, s: &Summand, depth: u32) -> Run<GridFn> {
        let mut grid: Option<GridFn> = None;
        for f in &s.factors {
            let g = self.grid(f, depth)?;
            grid = Some(match grid {
                None => g,
                Some(acc) => acc.phi_product(&g)?,
            });
        }
        let grid = grid.expect("summands have at least one factor");
        Ok(if s.power > 1 { grid.phi_power(s.power)? } else { grid })
    }

    fn systems(
        &mut self,
        p: Option<u64>,
        depth: u32,
        expr: Option<&str>,
        rules_in: Option<&PathBuf>,
    ) -> Run<Vec<RuleSystem>> {
        if let Some(path) = rules_in {
            return Ok(parse_rules_file(&read_file(path)?)?);
        }
        let expr = expr.ok_or_else(|| Failure::Usage("give a sum expression or --rules-in".into()))?;
        let p = prime(p.ok_or_else(|| Failure::Usage("--p is required".into()))?)?;
        let summands = parse_series(expr, p).map_err(Failure::Usage)?;
        summands
            .iter()
            .map(|s| {
                let grid = self.summand_grid(s, depth)?;
                Ok(discover_rules(&grid, s.nvars() as u32, &s.label)?.system)
            })
            .collect()
    }
}

fn series_output(systems: &[RuleSystem], h: &RatFunc) -> Output {
    let s_tot: u32 = systems.iter().map(|s| s.s).sum();
    let leading: Vec<Value> = h.taylor(4).iter().map(coeff_json).collect();
    Output {
        json: json!({
            "p": systems[0].p.get(),
            "s_tot": s_tot,
            "series": h,
            "text": h.to_string(),
            "leading": leading,
        }),
        text: h.to_string(),
    }
}

fn run(cli: &Cli, ctx: &mut Ctx) -> Run<Output> {
    match &cli.cmd {
        Cmd::En { p, poly, n_max } => {
            let f = parse_poly(poly, prime(*p)?).map_err(Failure::Usage)?;
            let mut rows = Vec::new();
            let mut text = String::new();
            for n in 0..=*n_max {
                let q = f.modulus().pow(n).ok_or_else(|| Failure::Usage("q overflows".into()))?;
                let e = ctx.cache.table(q, &f, 1, ctx.limit)?.values[1];
                rows.push(json!({"n": n, "q": q, "e": e}));
                text.push_str(&format!("{n}\t{q}\t{e}\n"));
            }
            Ok(Output { json: json!({"p": p, "poly": f.canonical_string(), "values": rows}), text })
        }
        Cmd::Phi { p, depth, poly } => {
            let f = parse_poly(poly, prime(*p)?).map_err(Failure::Usage)?;
            let grid = ctx.grid(&f, *depth)?;
            let json = serde_json::to_value(&grid).expect("grids serialize");
            let text = grid
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| format!("{i}/{}\t{}\n", grid.q(), fmt_q(v)))
                .collect();
            Ok(Output { json, text })
        }
        Cmd::Discover { p, depth, poly, name, rules_out } => {
            let f = parse_poly(poly, prime(*p)?).map_err(Failure::Usage)?;
            let grid = ctx.grid(&f, *depth)?;
            let found = discover_rules(&grid, f.nvars() as u32, name)?;
            let text = found.system.to_json();
            if let Some(path) = rules_out {
                write_file(path, &text)?;
            }
            Ok(Output { json: serde_json::to_value(&found.system).expect("serializes"), text })
        }
        Cmd::Series { p, depth, expr, rules_in, rules_out } => {
            let systems = ctx.systems(*p, *depth, expr.as_deref(), rules_in.as_ref())?;
            if let Some(path) = rules_out {
                write_file(path, &serde_json::to_string_pretty(&systems).expect("serializes"))?;
            }
            let h = hks_sum(&systems)?;
            Ok(series_output(&systems, &h))
        }
        Cmd::Mult { p, depth, input, rules_in } => {
            let from_json = |text: &str| -> Run<(RatFunc, u32, Prime)> {
                let v: Value = serde_json::from_str(text).map_err(|e| Failure::Usage(e.to_string()))?;
                let h: RatFunc = serde_json::from_value(v["series"].clone())
                    .map_err(|e| Failure::Usage(format!("series: {e}")))?;
                let s = v["s_tot"].as_u64().ok_or_else(|| Failure::Usage("missing s_tot".into()))?;
                let p = v["p"].as_u64().ok_or_else(|| Failure::Usage("missing p".into()))?;
                Ok((h, s as u32, prime(p)?))
            };
            let (h, s_tot, p) = match input.as_deref().map(str::trim) {
                Some(t) if t.starts_with('{') => from_json(t)?,
                Some(t) if PathBuf::from(t).is_file() => from_json(&read_file(&PathBuf::from(t))?)?,
                other => {
                    let systems = ctx.systems(*p, *depth, other, rules_in.as_ref())?;
                    (hks_sum(&systems)?, systems.iter().map(|s| s.s).sum(), systems[0].p)
                }
            };
            let mu = hk_multiplicity(&h, s_tot, p)?;
            Ok(Output { json: json!({"mu": fmt_q(&mu)}), text: fmt_q(&mu) })
        }
        Cmd::Zd { p, d, h, n_min, n_max, e_avoids_exponents } => {
            let h = Poly::parse(h, prime(*p)?, &["x", "y"])
                .map_err(|e| Failure::Usage(format!("h must be a polynomial in x, y: {e}")))?;
            let mut input = ZDInput::new(*d, h)?;
            input.e_avoids_exponents = *e_avoids_exponents;
            let lo = n_min.unwrap_or(input.c());
            let needed = lo + 3.max(input.r_period() + 1);
            let hi = n_max.unwrap_or(0).max(needed);
            let fit = fit_mu_with(&input, lo, hi, ctx.limit)?;
            let mut json = serde_json::to_value(&fit).expect("serializes");
            json["p"] = json!(p);
            json["D"] = json!(d);
            json["E"] = json!(input.e());
            json["c"] = json!(input.c());
            json["range"] = json!([lo, hi]);
            let mut text = format!("mu = {}\nmu1 = {}\n", fmt_q(&fit.mu), fmt_q(&fit.mu1));
            for ((n, e), (_, r)) in fit.values.iter().zip(&fit.tail) {
                text.push_str(&format!("e_{n} = {e}\trho_{n} = {}\n", fmt_q(r)));
            }
            if let (Some(per), Some(pre)) = (fit.period, fit.preperiod) {
                text.push_str(&format!("residual period {per} from n = {pre}\n"));
            }
            Ok(Output { json, text })
        }
        Cmd::Gamma { p, factors, theta, psi } => {
            let p = prime(*p)?;
            let mut prod = GammaVec::one(p);
            for f in factors {
                let v = GammaVec::parse(f, p).map_err(|e| Failure::Usage(format!("`{f}`: {e}")))?;
                prod = prod.mul(&v)?;
            }
            if *theta {
                prod = prod.theta()?;
            }
            if *psi {
                prod = prod.psi();
            }
            let alpha = fmt_q(&prod.alpha());
            Ok(Output {
                json: json!({"product": prod.to_string(), "alpha": alpha}),
                text: format!("{prod}\nalpha = {alpha}\n"),
            })
        }
        Cmd::Selfcheck => selfcheck(ctx),
    }
}

fn selfcheck(ctx: &mut Ctx) -> Run<Output> {
    let mut checks: Vec<(String, bool)> = Vec::new();
    for p in [2u64, 3, 5, 7] {
        let p = prime(p)?;
        let mut ok = true;
        for i in 0..16 {
            for j in 0..16 {
                let (u, v) = (GammaVec::lambda(p, i), GammaVec::lambda(p, j));
                ok &= u.mul(&v)? == oracle_mul(&u, &v)?;
            }
        }
        checks.push((format!("gamma product vs Jordan-block oracle, p = {p}"), ok));
    }
    for (p, f) in [(3, "x^2*y+x*y^2"), (5, "x^5+x^2*y^3"), (7, "x^4+x*y^3")] {
        let f = parse_poly(f, prime(p)?).map_err(Failure::Usage)?;
        let q = p as usize;
        let ok = (0..=2 * q).all(|a| {
            let g = f.pow_trunc(a as u64, q);
            colength_dense(q, &g) == colength_homogeneous(q, &g)
        });
        checks.push((format!("homogeneous colength vs dense elimination, {f}"), ok));
    }
    let p3 = prime(3)?;
    let f = parse_poly("y^3-x^4+x^2*y^2", p3).map_err(Failure::Usage)?;
    let sys = discover_rules(&ctx.grid(&f, 3)?, 2, "a")?.system;
    let h = hks_sum(&[sys.clone(), sys.clone()])?;
    let coeffs = h.taylor(3);
    let sum = Poly::disjoint_sum(&[f.clone(), f.clone()])?;
    let mut ok = true;
    for n in 0..=2u32 {
        let q = p3.pow(n).expect("small");
        let t = ctx.cache.table(q, &f, q, ctx.limit)?;
        ok &= coeffs[n as usize] == Q::from_integer((en_dot(&t, &t)? as i64).into());
        ok &= coeffs[n as usize] == Q::from_integer((direct_en(&sum, n, ctx.limit)? as i64).into());
    }
    checks.push(("series of f+f vs direct colengths, n <= 2".into(), ok));
    let r = solve_r_system(&[sys.clone(), sys])?;
    checks.push(("r(a,a) closed form".into(), *r.root() == RatFunc::from_ints(&[1, 36], &[1, -2])?));
    let g = ZDInput::new(14, Poly::parse("x^6*y^6*(x^2-y^2)", prime(7)?, &["x", "y"])?)?;
    let direct = direct_en(&g.to_poly()?, 1, ctx.limit)?;
    checks.push(("z^D - h split formula vs direct colength".into(), en_zd(&g, 1)? == direct));
    let id = GridFn::identity(p3, 3)?;
    checks.push(("identity grid has the Δ sequence".into(), l_of(&id) == hkfractal::coherent::delta_seq(p3, 3)));

    let all = checks.iter().all(|c| c.1);
    let text = checks
        .iter()
        .map(|(name, ok)| format!("{} {name}\n", if *ok { "PASS" } else { "FAIL" }))
        .collect();
    let json = json!({
        "ok": all,
        "checks": checks.iter().map(|(n, ok)| json!({"name": n, "ok": ok})).collect::<Vec<_>>(),
    });
    if !all {
        return Err(Failure::Compute(Error::Mismatch(format!("selfcheck failed:\n{text}"))));
    }
    Ok(Output { json, text })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let limit = match cli.dense_limit.map(DenseLimit::new).transpose() {
        Ok(l) => l.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut ctx = Ctx { cache: Cache::open(cli.cache_dir.as_deref(), cli.verify), limit };
    let outcome = run(&cli, &mut ctx);
    if cli.cache_dir.is_some() {
        eprintln!("cache: {} hits, {} computed", ctx.cache.hits, ctx.cache.computed);
    }
    match outcome {
        Ok(out) => {
            let mut text = if cli.json {
                serde_json::to_string(&out.json).expect("serializes")
            } else {
                out.text
            };
            if !text.ends_with('\n') {
                text.push('\n');
            }
            // A closed pipe (e.g. `hks ... | head`) is not an error.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            println!("{}", json!({"error": {"kind": e.kind(), "message": e.to_string()}}));
            ExitCode::from(1)
        }
    }
}
