//! Command definitions and dispatch.

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use dcongr::charvar::{self, ConnectionRank, CyclicQuotient, ModuleDescriptor};
use dcongr::ideals::{self, IdealBasis};
use dcongr::tower::{self, ProductFamily, TowerElement};
use dcongr::weierstrass;
use dcongr::{Context, DiffOp, Error, Norm, PadicScalar};

use crate::eval::{eval, render};
use crate::expr::{parse, SyntaxError};

#[derive(Parser, Debug)]
#[command(
    name = "dcongr",
    version,
    about = "p-adic differential operators at congruence level k"
)]
pub struct Cli {
    #[arg(long, global = true, env = "DCONGR_PRIME", default_value_t = 5)]
    pub prime: u64,
    /// Working precision in p-adic digits.
    #[arg(long, global = true, env = "DCONGR_PREC", default_value_t = 40)]
    pub prec: u32,
    /// Largest t-degree kept in series.
    #[arg(long, global = true, default_value_t = 64)]
    pub tdeg: usize,
    /// Largest operator order kept.
    #[arg(long, global = true, default_value_t = 64)]
    pub opmax: usize,
    /// Congruence level the expressions are read at.
    #[arg(long, global = true, default_value_t = 0)]
    pub level: u32,
    #[arg(long, global = true)]
    pub json: bool,
    /// Draw staircases as text pictures.
    #[arg(long, global = true)]
    pub ascii: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Operator norm at the level.
    Norm {
        expr: String,
    },
    /// Largest order attaining the norm.
    Nbar {
        expr: String,
    },
    /// Least t-index of the dominant coefficient.
    Nk {
        expr: String,
    },
    Mul {
        a: String,
        b: String,
    },
    /// Division with remainder by a second operator.
    Div {
        h: String,
        p: String,
    },
    Invert {
        expr: String,
    },
    /// The commutator `ab - ba`.
    Bracket {
        a: String,
        b: String,
    },
    /// Unit times dominant factor.
    Hensel {
        expr: String,
    },
    /// Iterated brackets reaching an invertible operator.
    Witness {
        expr: String,
    },
    /// Division basis and staircase of the left ideal spanned by the generators.
    Basis {
        #[arg(required = true)]
        gens: Vec<String>,
    },
    /// Normal form of the first operator modulo the ideal of the rest.
    Nf {
        expr: String,
        #[arg(required = true)]
        gens: Vec<String>,
    },
    /// Characteristic cycle; a lone `;` separates direct summands.
    Charcycle {
        #[arg(required = true)]
        gens: Vec<String>,
    },
    Holonomic {
        #[arg(required = true)]
        gens: Vec<String>,
    },
    /// Rank when the module is a connection.
    Rank {
        #[arg(required = true)]
        gens: Vec<String>,
    },
    /// Invariants across levels of an operator (read at level 0) or of an infinite product.
    Tower {
        expr: Option<String>,
        /// Use `prod_{n>=1} (1 - p^(slope*n + offset) D)` instead of an expression.
        #[arg(long)]
        product: bool,
        #[arg(long, default_value_t = 1)]
        slope: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        offset: i64,
        #[arg(long, default_value_t = 6)]
        horizon: u32,
    },
    /// Norms of the truncations of an infinite product.
    Normsuite {
        #[arg(long, default_value_t = 6)]
        kmax: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3])]
        m: Vec<u32>,
        #[arg(long, default_value_t = 1)]
        slope: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        offset: i64,
    },
    /// Recenters at `t = c`.
    Translate {
        #[arg(allow_negative_numbers = true)]
        c: String,
        expr: String,
    },
}

#[derive(Debug)]
pub enum Failure {
    Syntax(SyntaxError),
    Module(Error),
}

impl From<SyntaxError> for Failure {
    fn from(e: SyntaxError) -> Self {
        Failure::Syntax(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Module(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Syntax(_) => 2,
            Failure::Module(e) => match e {
                Error::PrecisionExhausted(_)
                | Error::CapExceeded(_)
                | Error::TruncationInsufficient { .. }
                | Error::NormOverflow(_) => 4,
                Error::HorizonInconclusive(_) => 5,
                _ => 3,
            },
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Failure::Syntax(e) => {
                json!({"error": {"kind": "SyntaxError", "offset": e.offset, "message": e.message}})
            }
            Failure::Module(e) => json!({"error": {"kind": e.tag(), "message": e.to_string()}}),
        }
    }
}

/// What a command prints: a text form and a JSON form.
pub struct Output {
    pub text: String,
    pub json: Value,
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(cli: &Cli) -> Outcome {
    match execute(cli) {
        Ok(out) => Outcome {
            code: 0,
            stdout: if cli.json {
                serde_json::to_string_pretty(&out.json).unwrap() + "\n"
            } else {
                out.text + "\n"
            },
            stderr: String::new(),
        },
        Err(f) => {
            let obj = serde_json::to_string(&f.to_json()).unwrap() + "\n";
            Outcome {
                code: f.exit_code(),
                stdout: if cli.json { obj.clone() } else { String::new() },
                stderr: obj,
            }
        }
    }
}

fn norm_text(n: Norm) -> String {
    match n.log_p() {
        None => "0".into(),
        Some(0) => "1".into(),
        Some(e) => format!("p^{e}"),
    }
}

struct Session<'a> {
    cli: &'a Cli,
    ctx: Context,
}

impl Session<'_> {
    fn op(&self, src: &str) -> Result<DiffOp, Failure> {
        Ok(eval(&parse(src)?, self.cli.level, &self.ctx)?)
    }

    fn ops(&self, srcs: &[String]) -> Result<Vec<DiffOp>, Failure> {
        srcs.iter().map(|s| self.op(s)).collect()
    }

    fn show(&self, h: &DiffOp) -> String {
        render(h, &self.ctx)
    }

    fn module(&self, gens: &[String]) -> Result<ModuleDescriptor, Failure> {
        let mut summands = Vec::new();
        for group in gens.split(|g| g == ";") {
            summands.push(CyclicQuotient::new(self.cli.level, self.ops(group)?)?);
        }
        let mut m = if summands.len() == 1 {
            ModuleDescriptor::CyclicQuotient(summands.pop().unwrap())
        } else {
            ModuleDescriptor::DirectSum(summands)
        };
        m.prepare(&self.ctx)?;
        Ok(m)
    }
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    let ctx = Context::new(cli.prime, cli.prec, cli.tdeg, cli.opmax)?;
    let s = Session { cli, ctx };
    let ctx = &s.ctx;
    let out = match &cli.command {
        Command::Norm { expr } => {
            let n = s.op(expr)?.op_norm();
            Output {
                text: format!(
                    "{} (log_p = {})",
                    norm_text(n),
                    n.log_p().map_or("-inf".into(), |e| e.to_string())
                ),
                json: json!({"norm": norm_text(n), "log_p": n.log_p()}),
            }
        }
        Command::Nbar { expr } => {
            let n = s.op(expr)?.nbar()?;
            Output {
                text: n.to_string(),
                json: json!({"nbar": n}),
            }
        }
        Command::Nk { expr } => {
            let n = s.op(expr)?.nk()?;
            Output {
                text: n.to_string(),
                json: json!({"nk": n}),
            }
        }
        Command::Mul { a, b } => {
            let r = s.op(a)?.op_mul(&s.op(b)?, ctx)?;
            Output {
                text: s.show(&r),
                json: json!({"product": s.show(&r), "truncated": r.truncated()}),
            }
        }
        Command::Bracket { a, b } => {
            let (a, b) = (s.op(a)?, s.op(b)?);
            let r = a.op_mul(&b, ctx)?.sub(&b.op_mul(&a, ctx)?, ctx)?;
            Output {
                text: s.show(&r),
                json: json!({"bracket": s.show(&r)}),
            }
        }
        Command::Div { h, p } => {
            let d = weierstrass::divide(&s.op(h)?, &s.op(p)?, ctx)?;
            let (q, r, t) = (s.show(&d.quotient), s.show(&d.remainder), s.show(&d.tail));
            Output {
                text: format!("quotient: {q}\nremainder: {r}\ntail: {t}"),
                json: json!({"quotient": q, "remainder": r, "tail": t, "passes": d.passes, "truncated": d.truncated()}),
            }
        }
        Command::Invert { expr } => {
            let g = s.op(expr)?.op_invert(ctx)?;
            Output {
                text: s.show(&g),
                json: json!({"inverse": s.show(&g), "precision": ctx.precision()}),
            }
        }
        Command::Hensel { expr } => {
            let r = weierstrass::hensel_factor(&s.op(expr)?, ctx)?;
            let order = r.dominant.order().unwrap_or(0);
            let (u, d, t) = (s.show(&r.unit), s.show(&r.dominant), s.show(&r.tail));
            Output {
                text: format!("dominant order: {order}\nunit: {u}\ndominant: {d}\ntail: {t}"),
                json: json!({"dominant_order": order, "unit": u, "dominant": d, "tail": t, "iterations": r.iterations}),
            }
        }
        Command::Witness { expr } => {
            let w = weierstrass::simplicity_witness(&s.op(expr)?, ctx)?;
            let word: String = w
                .word
                .iter()
                .map(|b| match b {
                    weierstrass::Bracket::T => 't',
                    weierstrass::Bracket::Del => 'D',
                })
                .collect();
            Output {
                text: format!("word: {word}\nwitness: {}", s.show(&w.op)),
                json: json!({"word": w.word, "witness": s.show(&w.op)}),
            }
        }
        Command::Basis { gens } => basis(&s, gens)?,
        Command::Nf { expr, gens } => {
            let h = s.op(expr)?;
            let b = ideals::division_basis(&s.ops(gens)?, ctx)?;
            let nf = match &b {
                IdealBasis::UnitIdeal => DiffOp::zero(cli.level),
                IdealBasis::Basis(b) => ideals::normal_form(&h, b, ctx)?,
            };
            let member = nf.below_floor(ctx);
            Output {
                text: s.show(&nf),
                json: json!({"normal_form": s.show(&nf), "member": member}),
            }
        }
        Command::Charcycle { gens } => {
            let c = charvar::char_cycle(&s.module(gens)?, ctx)?;
            Output {
                text: c.render(),
                json: serde_json::to_value(&c).unwrap(),
            }
        }
        Command::Holonomic { gens } => {
            let m = s.module(gens)?;
            let h = charvar::is_holonomic(&m);
            let bound = charvar::length_bound(&m, ctx)?;
            Output {
                text: match bound {
                    Some(b) => format!("{h} (length at most {b})"),
                    None => h.to_string(),
                },
                json: json!({"holonomic": h, "length_bound": bound}),
            }
        }
        Command::Rank { gens } => match charvar::connection_rank(&s.module(gens)?, ctx)? {
            ConnectionRank::Rank {
                rank,
                presentations,
            } => {
                let pres: Vec<String> = presentations.iter().map(|p| s.show(p)).collect();
                Output {
                    text: format!("{rank}\n{}", pres.join("\n"))
                        .trim_end()
                        .to_string(),
                    json: json!({"connection": true, "rank": rank, "presentations": pres}),
                }
            }
            ConnectionRank::NotAConnection => Output {
                text: "not a connection".into(),
                json: json!({"connection": false}),
            },
        },
        Command::Tower {
            expr,
            product,
            slope,
            offset,
            horizon,
        } => {
            let e = match (expr, product) {
                (_, true) => TowerElement::ProductFamily(ProductFamily::new(*slope, *offset)?),
                (Some(src), false) => TowerElement::finite(eval(&parse(src)?, 0, ctx)?, ctx)?,
                (None, false) => {
                    return Err(Error::RangeError("give an expression or --product".into()).into())
                }
            };
            let r = tower::tower_report(&e, *horizon, ctx)?;
            let mut text = String::from("k  nbar  log_p_norm  m_k\n");
            for row in &r.rows {
                text += &format!(
                    "{:<2} {:<5} {:<11} {}\n",
                    row.k, row.nbar, row.log_p_norm, row.m_k
                );
            }
            let m = serde_json::to_value(r.m).unwrap();
            text += &format!(
                "m = {}, member = {}, horizon = {}",
                m.to_string().trim_matches('"'),
                r.member,
                r.horizon
            );
            Output {
                text,
                json: serde_json::to_value(&r).unwrap(),
            }
        }
        Command::Normsuite {
            kmax,
            m,
            slope,
            offset,
        } => {
            let f = ProductFamily::new(*slope, *offset)?;
            let rows = tower::level_norm_suite(&f, *kmax, m, ctx)?;
            let mut text = String::from("quantity          level  log_p_norm\n");
            for r in &rows {
                let what = if r.difference {
                    format!("|P - P_{}|", r.k)
                } else {
                    format!("|P_{}|", r.k)
                };
                text += &format!("{what:<17} {:<6} {}\n", r.level, r.log_p_norm);
            }
            Output {
                text: text.trim_end().to_string(),
                json: json!({"rows": rows}),
            }
        }
        Command::Translate { c, expr } => {
            let shift = s.op(c)?;
            if shift.order().unwrap_or(0) != 0 || shift.coeff(0).degree().unwrap_or(0) != 0 {
                return Err(Error::RangeError("the shift must be a constant".into()).into());
            }
            let c: PadicScalar = shift.coeff(0).coeff(0);
            if c.val().is_some_and(|v| v < 0) {
                return Err(Error::RangeError("the shift must be integral".into()).into());
            }
            let r = s.op(expr)?.translate(&c, ctx)?;
            Output {
                text: s.show(&r),
                json: json!({"translated": s.show(&r)}),
            }
        }
    };
    Ok(out)
}

fn basis(s: &Session, gens: &[String]) -> Result<Output, Failure> {
    let ctx = &s.ctx;
    let b = ideals::division_basis(&s.ops(gens)?, ctx)?;
    let stair = b.staircase();
    let minimals: Vec<[usize; 2]> = stair.minimals().iter().map(|e| [e.v, e.d]).collect();
    let picture = {
        let w = stair.minimals().iter().map(|e| e.v).max().unwrap_or(0) + 3;
        let h = stair.minimals().iter().map(|e| e.d).max().unwrap_or(0) + 3;
        stair.render_ascii(w, h)
    };
    let (ops, exps, torsion) = match &b {
        IdealBasis::UnitIdeal => (vec![], vec![], false),
        IdealBasis::Basis(d) => (
            d.ops.iter().map(|o| s.show(o)).collect::<Vec<_>>(),
            d.exponents.clone(),
            d.torsion,
        ),
    };
    let mut text = if b.is_unit() {
        "unit ideal".to_string()
    } else {
        let mut t = String::new();
        for (op, e) in ops.iter().zip(exps.iter()) {
            t += &format!("{e}  {op}\n");
        }
        t.trim_end().to_string()
    };
    if s.cli.ascii {
        text += "\n";
        text += picture.trim_end();
    }
    let mut json =
        json!({"unit": b.is_unit(), "staircase": minimals, "basis": ops, "torsion": torsion});
    if s.cli.ascii {
        json["ascii"] = Value::String(picture);
    }
    Ok(Output { text, json })
}
