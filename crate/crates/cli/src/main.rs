use clap::{Args, Parser, Subcommand, ValueEnum};
use cover_upsilon::complex::random::random_complex;
use cover_upsilon::complex::{acyclic_box, correction_term, surgery_d, v_invariant, KnotComplex};
use cover_upsilon::concordance::{
    check_group_order, concordance_test, det_m, finite_order_s, independence_driver,
    slice_obstruction, torus_det_bound, FiniteOrder, IntLaurentPoly, Obstruction, Rejection,
    UpsilonMap, Verdict, DEFAULT_CAP,
};
use cover_upsilon::grid::{build_torus_grid, cross_check, lens_d, spinc_slice};
use cover_upsilon::models::{graded_iso_check, ModelComplex};
use cover_upsilon::oneone::{
    lift_s0_complex, lift_table, torus_staircase, twist_complex, zero_alexander_classes, Family,
    OneOneComplex,
};
use cover_upsilon::rational::{fmt_q, parse_q, Q};
use cover_upsilon::upsilon::{upsilon_at, upsilon_function_with, PiecewiseLinear};
use cover_upsilon::Exec;
use rand::SeedableRng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

/// Upsilon-type concordance invariants from knot complexes, twisted grid
/// diagrams of lens spaces and lifts to branched double covers.
///
/// Exit codes: 0 success, 1 usage or I/O error, 2 obstruction found,
/// 3 internal invariant violated. UPSILON_CAP overrides the subgroup search
/// cap (default 10000, per primary component).
#[derive(Parser)]
#[command(name = "cover-upsilon", version)]
struct Cli {
    /// Run per-t, per-spin^c and per-subgroup loops on the thread pool.
    #[arg(long, global = true)]
    parallel: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Torus,
    Twist,
    Trefoil,
    Unknot,
}

/// Where a complex comes from. Exactly one of `--input`, `--family`,
/// `--grid-p` or `--model` is required.
#[derive(Args, Debug, Clone)]
struct Source {
    /// Complex JSON file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in family; torus and twist need `--n`.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    n: Option<u32>,
    /// Twisted grid of T_{2,p} in L(p,1); pick classes with `--spinc`.
    #[arg(long)]
    grid_p: Option<i64>,
    /// Spin^c classes, comma separated (default 0).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    spinc: Vec<i64>,
    /// Thin complex of the model C[e,w], given as `e,w`.
    #[arg(long, value_delimiter = ',')]
    model: Vec<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a complex as JSON.
    Build {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a complex, or run the homomorphism checks on random complexes.
    Validate {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Number of random complexes to test.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest random complex.
        #[arg(long, default_value_t = 8)]
        max_gens: usize,
    },
    /// Υ as breakpoint CSV (`t,value`), or its value at `--at`.
    Upsilon {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        at: Option<String>,
    },
    /// τ, one value per complex, comma separated.
    Tau {
        #[command(flatten)]
        src: Source,
    },
    /// V_m, and with `--surgery q` the d-invariant of q-surgery in class m.
    V {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 0)]
        m: i64,
        #[arg(long)]
        surgery: Option<i64>,
    },
    /// Twisted grid diagram of T_{2,p} in L(p,1).
    Grid {
        #[arg(long)]
        p: i64,
        /// Compare rectangle enumeration with the closed form and check
        /// every slice.
        #[arg(long)]
        check_differentials: bool,
        #[arg(long, allow_hyphen_values = true)]
        spinc: Option<i64>,
        /// Write the slice selected by `--spinc` as JSON.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Print `h, generators, d, tau` for every class.
        #[arg(long)]
        table: bool,
        /// Write Υ of every class as an upsilon map on Z_p.
        #[arg(long)]
        upsilon_map: Option<PathBuf>,
    },
    /// Pole and wire models C[e,w].
    Models {
        /// `e,w`.
        #[arg(long, value_delimiter = ',', required = true)]
        fused: Vec<u32>,
        /// Apply this many pole reductions first.
        #[arg(long, default_value_t = 0)]
        reduce: u32,
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Match against the grid slice with p = w + 2e, h = e.
        #[arg(long)]
        against_grid: bool,
    },
    /// Lifts of (1,1)-diagram complexes to the branched double cover.
    Lift {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: u32,
        /// CSV with columns i, j, A, class.
        #[arg(long)]
        table: Option<PathBuf>,
        /// JSON of the complex in the spin structure.
        #[arg(long)]
        s0: Option<PathBuf>,
        /// Print the classes whose generators all have A = 0.
        #[arg(long)]
        zero_classes: bool,
    },
    /// Slice, concordance and finite order obstructions.
    Obstruct {
        #[command(subcommand)]
        kind: ObstructCmd,
    },
    /// Compare d, τ and Υ of two complexes; exit 2 if they differ.
    Compare {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        other: PathBuf,
    },
}

#[derive(Subcommand)]
enum ObstructCmd {
    /// Look for a subgroup of order sqrt|H| on which Υ vanishes.
    Slice {
        #[arg(long)]
        upsilon_map: PathBuf,
        /// Expected cyclic orders of H, comma separated.
        #[arg(long, value_delimiter = ',')]
        group: Vec<u64>,
        /// Alexander polynomial; H must have order det_m of it.
        #[arg(long, allow_hyphen_values = true)]
        alexander: Option<String>,
        #[arg(long, default_value_t = 2)]
        m: u32,
    },
    /// Look for a subgroup of H1 x H2 where the two maps agree.
    Concordance {
        #[arg(long)]
        upsilon_map: PathBuf,
        #[arg(long)]
        other: PathBuf,
    },
    /// Sign test on the sums of Υ_ξ(t) over subgroups of order p.
    FiniteOrder {
        #[arg(long)]
        upsilon_map: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value = "1")]
        t: String,
    },
    /// Test every relation among T_{2,q} with coefficients in [-bound, bound].
    Independence {
        /// Torus knot indices q = 2n + 1, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
        family: Vec<u32>,
        #[arg(long, default_value_t = 3)]
        bound: i64,
    },
    /// det of the m-fold cyclic branched cover.
    Det {
        #[arg(long, allow_hyphen_values = true)]
        alexander: String,
        #[arg(long, default_value_t = 2)]
        m: u32,
    },
    /// Necessary determinant condition for concordance to T_{2,2n+1}.
    DetBound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        det: u64,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Invariant(_) => 3,
        }
    }
}

fn usage(s: impl Into<String>) -> CliError {
    CliError::Usage(s.into())
}

fn invariant(e: impl std::fmt::Display) -> CliError {
    CliError::Invariant(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes to `path`, or to stdout when there is none.
fn emit(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{body}");
            if !body.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn cap() -> Result<u64, CliError> {
    match std::env::var("UPSILON_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("UPSILON_CAP must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_CAP),
    }
}

fn family_complex(f: FamilyArg, n: Option<u32>) -> Result<KnotComplex, CliError> {
    let need = || n.ok_or_else(|| usage("--family torus|twist needs --n"));
    match f {
        FamilyArg::Torus => torus_staircase(need()?).map_err(|e| usage(e.to_string())),
        FamilyArg::Twist => twist_complex(need()?).map_err(|e| usage(e.to_string())),
        FamilyArg::Trefoil => Ok(torus_staircase(1).expect("n = 1")),
        FamilyArg::Unknot => Ok(KnotComplex::unknot()),
    }
}

fn checked(k: KnotComplex) -> Result<KnotComplex, CliError> {
    let v = k.validate();
    if !v.is_empty() {
        let names: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
        return Err(invariant(names.join("; ")));
    }
    // knot type: homology of rank one after U is inverted
    correction_term(&k).map_err(invariant)?;
    Ok(k)
}

fn load(src: &Source) -> Result<Vec<(String, KnotComplex)>, CliError> {
    let given = [
        src.input.is_some(),
        src.family.is_some(),
        src.grid_p.is_some(),
        !src.model.is_empty(),
    ];
    if given.iter().filter(|&&b| b).count() != 1 {
        return Err(usage(
            "give exactly one of --input, --family, --grid-p, --model",
        ));
    }
    if let Some(path) = &src.input {
        let k = KnotComplex::from_json(&read(path)?).map_err(|e| usage(e.to_string()))?;
        return Ok(vec![(path.display().to_string(), checked(k)?)]);
    }
    if let Some(f) = src.family {
        return Ok(vec![(format!("{f:?}"), family_complex(f, src.n)?)]);
    }
    if let Some(p) = src.grid_p {
        let g = build_torus_grid(p).map_err(|e| usage(e.to_string()))?;
        let hs = if src.spinc.is_empty() {
            vec![0]
        } else {
            src.spinc.clone()
        };
        return hs
            .iter()
            .map(|&h| {
                let k = spinc_slice(&g, h).map_err(|e| usage(e.to_string()))?;
                Ok((format!("h={h}"), checked(k)?))
            })
            .collect();
    }
    let [e, w] = src.model[..] else {
        return Err(usage("--model takes e,w"));
    };
    let m = ModelComplex::fused(e, w).map_err(|e| usage(e.to_string()))?;
    Ok(vec![(
        format!("C[{e},{w}]"),
        m.knot_complex().map_err(invariant)?,
    )])
}

fn single(src: &Source) -> Result<KnotComplex, CliError> {
    let mut ks = load(src)?;
    if ks.len() != 1 {
        return Err(usage("this command takes a single complex"));
    }
    Ok(ks.remove(0).1)
}

fn upsilon(k: &KnotComplex, exec: Exec) -> Result<PiecewiseLinear, CliError> {
    upsilon_function_with(k, exec).map_err(invariant)
}

fn q_arg(s: &str) -> Result<Q, CliError> {
    parse_q(s).map_err(|e| usage(format!("bad rational {s:?}: {e}")))
}

fn load_map(path: &Path) -> Result<UpsilonMap, CliError> {
    UpsilonMap::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn report(v: &Verdict) -> u8 {
    match v {
        Verdict::PassesWith(g) => {
            let els: Vec<String> = g
                .elements()
                .iter()
                .map(|x| {
                    format!(
                        "({})",
                        x.iter()
                            .map(|a| a.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    )
                })
                .collect();
            println!(
                "passes with subgroup of order {}: {}",
                g.order(),
                els.join(" ")
            );
            0
        }
        Verdict::Obstructed(Obstruction::NotSquare { order }) => {
            println!("obstructed: |H| = {order} is not a square");
            2
        }
        Verdict::Obstructed(Obstruction::NoSubgroup { checked }) => {
            println!("obstructed: none of the {checked} subgroups of order sqrt|H| works");
            2
        }
    }
}

/// Homomorphism checks on one complex against a second one.
fn property_failures(
    a: &KnotComplex,
    b: &KnotComplex,
    exec: Exec,
) -> Result<Vec<String>, CliError> {
    let (ua, ub) = (upsilon(a, exec)?, upsilon(b, exec)?);
    let mut bad = Vec::new();
    let t = a.tensor(b).map_err(invariant)?;
    if upsilon(&t, exec)? != ua.add(&ub) {
        bad.push("tensor is not additive".to_string());
    }
    if upsilon(&a.dual(), exec)? != ua.neg() {
        bad.push("dual does not negate".to_string());
    }
    let padded = a.direct_sum(&acyclic_box("extra", 1, Q::from_integer(-1), None));
    if upsilon(&padded, exec)? != ua {
        bad.push("acyclic summand changes Υ".to_string());
    }
    Ok(bad)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let exec = if cli.parallel {
        Exec::Parallel
    } else {
        Exec::Sequential
    };
    match cli.cmd {
        Cmd::Build { src, out } => {
            let k = single(&src)?;
            emit(out.as_deref(), &k.to_json())?;
        }
        Cmd::Validate {
            input,
            random,
            seed,
            max_gens,
        } => {
            if let Some(path) = input {
                let k = KnotComplex::from_json(&read(&path)?).map_err(|e| usage(e.to_string()))?;
                checked(k)?;
                println!("ok");
            }
            if let Some(count) = random {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let mut fails = Vec::new();
                let mut prev = KnotComplex::unknot();
                for i in 0..count {
                    let k = random_complex(&mut rng, max_gens.max(1));
                    if !k.validate().is_empty() {
                        fails.push(format!("complex {i}: invalid"));
                    }
                    for f in property_failures(&k, &prev, exec)? {
                        fails.push(format!("complex {i}: {f}"));
                    }
                    prev = k;
                }
                if !fails.is_empty() {
                    return Err(invariant(fails.join("; ")));
                }
                println!("{count} random complexes passed (seed {seed})");
            }
        }
        Cmd::Upsilon { src, out, at } => {
            let k = single(&src)?;
            match at {
                Some(t) => {
                    let t = q_arg(&t)?;
                    if t < Q::from_integer(0) || t > Q::from_integer(2) {
                        return Err(usage("t must lie in [0, 2]"));
                    }
                    let v = upsilon_at(&k, t).map_err(invariant)?;
                    emit(out.as_deref(), &fmt_q(&v))?;
                }
                None => emit(out.as_deref(), &upsilon(&k, exec)?.to_csv())?,
            }
        }
        Cmd::Tau { src } => {
            let ks = load(&src)?;
            let taus = ks
                .iter()
                .map(|(_, k)| Ok(fmt_q(&-upsilon(k, exec)?.initial_slope())))
                .collect::<Result<Vec<_>, CliError>>()?;
            println!("{}", taus.join(","));
        }
        Cmd::V { src, m, surgery } => {
            let k = single(&src)?;
            if m < 0 {
                return Err(usage("--m must be nonnegative"));
            }
            // v_invariant is d - 2 V_m
            let v = v_invariant(&k, m).map_err(invariant)?;
            let d = correction_term(&k).map_err(invariant)?;
            println!("V_{m} = {}", fmt_q(&((d - v) / Q::from_integer(2))));
            if let Some(qf) = surgery {
                if qf <= 0 || 2 * m > qf {
                    return Err(usage("--surgery needs q > 0 and 0 <= m <= q/2"));
                }
                println!("d = {}", fmt_q(&surgery_d(qf, m, v)));
            }
        }
        Cmd::Grid {
            p,
            check_differentials,
            spinc,
            emit: path,
            table,
            upsilon_map,
        } => {
            let g = build_torus_grid(p).map_err(|e| usage(e.to_string()))?;
            println!(
                "grid of T(2,{p}) in L({p},1): {} generators, {} classes",
                g.generators().len(),
                p
            );
            if check_differentials {
                let c = cross_check(&g, exec).map_err(invariant)?;
                println!(
                    "{} arrows avoiding X, {} in all; agree: {}; max out-degree {}",
                    c.x_free_arrows, c.full_arrows, c.agree, c.max_out
                );
                if !c.ok() {
                    return Err(invariant(format!("grid cross-check failed: {c:?}")));
                }
            }
            if table {
                let n = (p - 1) / 2;
                let hs: Vec<i64> = (-n..=n).collect();
                let rows = exec.map(&hs, |&h| {
                    let k = spinc_slice(&g, h).map_err(invariant)?;
                    let d = correction_term(&k).map_err(invariant)?;
                    let u = upsilon_function_with(&k, Exec::Sequential).map_err(invariant)?;
                    Ok::<_, CliError>(format!(
                        "{h},{},{},{}",
                        k.len(),
                        fmt_q(&d),
                        fmt_q(&-u.initial_slope())
                    ))
                });
                println!("h,generators,d,tau");
                for r in rows {
                    println!("{}", r?);
                }
            }
            if let Some(path) = upsilon_map {
                let hs: Vec<i64> = (-(p - 1) / 2..=(p - 1) / 2).collect();
                let fs = exec.map(&hs, |&h| {
                    let k = spinc_slice(&g, h).map_err(invariant)?;
                    let u = upsilon_function_with(&k, Exec::Sequential).map_err(invariant)?;
                    Ok::<_, CliError>((h, u))
                });
                let fs = fs.into_iter().collect::<Result<Vec<_>, _>>()?;
                let m = UpsilonMap::cyclic(p as u64, &fs).map_err(invariant)?;
                emit(Some(&path), &m.to_json())?;
            }
            if let Some(path) = path {
                let h = spinc.ok_or_else(|| usage("--emit needs --spinc"))?;
                let k = spinc_slice(&g, h).map_err(|e| usage(e.to_string()))?;
                if k.tower() != Some(lens_d(p, h)) {
                    return Err(invariant("slice tower differs from the lens space d"));
                }
                emit(Some(&path), &k.to_json())?;
            }
        }
        Cmd::Models {
            fused,
            reduce,
            emit: path,
            against_grid,
        } => {
            let [e, w] = fused[..] else {
                return Err(usage("--fused takes e,w"));
            };
            let mut m = ModelComplex::fused(e, w).map_err(|x| usage(x.to_string()))?;
            for _ in 0..reduce.min(e) {
                m = m.reduce_step().map_err(invariant)?;
            }
            let k = m.knot_complex().map_err(invariant)?;
            let u = upsilon(&k, exec)?;
            println!(
                "C[{e},{w}] after {} reductions: {} generators, tau {}, Upsilon(1) {}",
                reduce.min(e),
                m.len(),
                fmt_q(&-u.initial_slope()),
                fmt_q(&u.eval(Q::from_integer(1)))
            );
            if against_grid {
                // r reductions of C[e,w] leave C[e-r,w], which is the slice
                // h = e - r of L(w + 2(e - r), 1)
                let h = (e - reduce.min(e)) as i64;
                let p = w as i64 + 2 * h;
                if p == 1 {
                    if k.len() != 1 || upsilon(&k, exec)? != PiecewiseLinear::zero() {
                        return Err(invariant("C[0,1] is not the unknot"));
                    }
                    println!("matches the unknot");
                } else {
                    let g = build_torus_grid(p).map_err(|x| usage(x.to_string()))?;
                    let s = spinc_slice(&g, h).map_err(invariant)?;
                    match graded_iso_check(&m, &s) {
                        Some(found) => {
                            println!("matches grid slice p={p} h={h} ({:?})", found.orientation)
                        }
                        None => {
                            return Err(invariant(format!("no match with grid slice p={p} h={h}")))
                        }
                    }
                }
            }
            if let Some(path) = path {
                emit(Some(&path), &m.to_json())?;
            }
        }
        Cmd::Lift {
            family,
            n,
            table,
            s0,
            zero_classes,
        } => {
            let fam = match family {
                FamilyArg::Torus => Family::Torus,
                FamilyArg::Twist => Family::Twist,
                _ => return Err(usage("lift supports --family torus or twist")),
            };
            let k = OneOneComplex::new(fam, n).map_err(|e| usage(e.to_string()))?;
            let t = lift_table(&k);
            let quiet = zero_classes || table.is_some() || s0.is_some();
            if let Some(path) = table {
                emit(Some(&path), &t.to_csv())?;
            }
            if let Some(path) = s0 {
                let c = checked(lift_s0_complex(&k))?;
                emit(Some(&path), &c.to_json())?;
            }
            if zero_classes {
                let z: Vec<String> = zero_alexander_classes(&t)
                    .iter()
                    .map(|c| c.to_string())
                    .collect();
                println!("{}", z.join(","));
            }
            if !quiet {
                emit(None, &t.to_csv())?;
            }
        }
        Cmd::Obstruct { kind } => return obstruct(kind, exec),
        Cmd::Compare { input, other } => {
            let a =
                checked(KnotComplex::from_json(&read(&input)?).map_err(|e| usage(e.to_string()))?)?;
            let b =
                checked(KnotComplex::from_json(&read(&other)?).map_err(|e| usage(e.to_string()))?)?;
            let (da, db) = (
                correction_term(&a).map_err(invariant)?,
                correction_term(&b).map_err(invariant)?,
            );
            let (ua, ub) = (upsilon(&a, exec)?, upsilon(&b, exec)?);
            let mut diff = Vec::new();
            if da != db {
                diff.push(format!("d: {} vs {}", fmt_q(&da), fmt_q(&db)));
            }
            if ua != ub {
                diff.push(format!("Upsilon: {ua} vs {ub}"));
            }
            if diff.is_empty() {
                println!("d, tau and Upsilon agree");
            } else {
                println!("differ: {}", diff.join("; "));
                return Ok(2);
            }
        }
    }
    Ok(0)
}

fn obstruct(kind: ObstructCmd, exec: Exec) -> Result<u8, CliError> {
    match kind {
        ObstructCmd::Slice {
            upsilon_map,
            group,
            alexander,
            m,
        } => {
            let u = load_map(&upsilon_map)?;
            if !group.is_empty() && u.group().orders() != group.as_slice() {
                return Err(usage(format!(
                    "--group {group:?} does not match the map's group {}",
                    u.group()
                )));
            }
            if let Some(a) = alexander {
                let poly = IntLaurentPoly::parse(&a).map_err(|e| usage(e.to_string()))?;
                check_group_order(u.group(), &poly, m).map_err(|e| usage(e.to_string()))?;
            }
            if !u.is_total() {
                return Err(usage(format!(
                    "the map does not cover all of {}",
                    u.group()
                )));
            }
            let v = slice_obstruction(&u, cap()?, exec).map_err(|e| usage(e.to_string()))?;
            Ok(report(&v))
        }
        ObstructCmd::Concordance { upsilon_map, other } => {
            let (a, b) = (load_map(&upsilon_map)?, load_map(&other)?);
            if !a.is_total() || !b.is_total() {
                return Err(usage("both maps must cover their groups"));
            }
            let v = concordance_test(&a, &b, cap()?, exec).map_err(|e| usage(e.to_string()))?;
            Ok(report(&v))
        }
        ObstructCmd::FiniteOrder { upsilon_map, p, t } => {
            let u = load_map(&upsilon_map)?;
            match finite_order_s(&u, p, q_arg(&t)?).map_err(|e| usage(e.to_string()))? {
                FiniteOrder::Zero { warning } => {
                    if let Some(w) = warning {
                        eprintln!("warning: {w}");
                    }
                    println!("zero: no obstruction");
                    Ok(0)
                }
                FiniteOrder::NonzeroWitness(v) => {
                    println!("nonzero: every combination has |S| >= {}", fmt_q(&v));
                    Ok(2)
                }
            }
        }
        ObstructCmd::Independence { family, bound } => {
            let mut ns = Vec::new();
            for q in &family {
                if q % 2 == 0 || *q < 3 {
                    return Err(usage(format!("torus index {q} must be odd and at least 3")));
                }
                ns.push((q - 1) / 2);
            }
            let reports =
                independence_driver(&ns, bound, cap()?, exec).map_err(|e| usage(e.to_string()))?;
            let (mut sq, mut tau, mut wit, mut open) = (0, 0, 0, Vec::new());
            for r in &reports {
                match &r.rejection {
                    Some(Rejection::NotSquare { .. }) => sq += 1,
                    Some(Rejection::Tau { .. }) => tau += 1,
                    Some(Rejection::Witness { metabolizers }) => {
                        wit += 1;
                        println!(
                            "{:?}: H witness in each of {metabolizers} metabolizers",
                            r.coeffs
                        );
                    }
                    None => open.push(format!("{:?}", r.coeffs)),
                }
            }
            println!(
                "{} relations: {sq} non-square, {tau} with tau != 0, {wit} by H witness, {} open",
                reports.len(),
                open.len()
            );
            if open.is_empty() {
                Ok(2)
            } else {
                println!("open: {}", open.join(" "));
                Ok(0)
            }
        }
        ObstructCmd::Det { alexander, m } => {
            let poly = IntLaurentPoly::parse(&alexander).map_err(|e| usage(e.to_string()))?;
            poly.check_knot().map_err(|e| usage(e.to_string()))?;
            if m < 2 {
                return Err(usage("--m must be at least 2"));
            }
            println!("{}", det_m(&poly, m));
            Ok(0)
        }
        ObstructCmd::DetBound { n, det } => {
            if n == 0 || det == 0 {
                return Err(usage("--n and --det must be positive"));
            }
            let ok = torus_det_bound(n, det);
            println!("{ok}");
            Ok(if ok { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
