use std::fmt;

use crate::alphabet::quote_atom;
use crate::enrich::RuleDir;

/// A term of the grammar language. Type formulas and regular expressions
/// share one syntax; which reading applies depends on the position of a term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// `[E1, ..., En]`; `[]` is the empty string.
    Concat(Vec<Expr>),
    /// `{E1, ..., En}`; `{}` is the empty language.
    Union(Vec<Expr>),
    Star(Box<Expr>),
    Plus(Box<Expr>),
    Optional(Box<Expr>),
    /// `&`: intersection of languages or conjunction of types.
    And(Box<Expr>, Box<Expr>),
    /// `;`: disjunction of types.
    Or(Box<Expr>, Box<Expr>),
    /// `~`: set complement.
    Not(Box<Expr>),
    Rule {
        dir: RuleDir,
        focus: Box<Expr>,
        result: Box<Expr>,
        context: Box<Expr>,
    },
    /// Macro, builtin, or (without arguments) a type atom.
    Call { name: String, args: Vec<Expr> },
    /// A quoted atom such as `'E'`.
    Atom(String),
    Var(String),
    Str(String),
}

impl Expr {
    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        Expr::Call {
            name: name.to_string(),
            args,
        }
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    /// Replaces variables by the bound terms.
    pub fn substitute(&self, bind: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(bind));
        match self {
            Expr::Concat(xs) => Expr::Concat(xs.iter().map(|x| x.substitute(bind)).collect()),
            Expr::Union(xs) => Expr::Union(xs.iter().map(|x| x.substitute(bind)).collect()),
            Expr::Star(x) => Expr::Star(sub(x)),
            Expr::Plus(x) => Expr::Plus(sub(x)),
            Expr::Optional(x) => Expr::Optional(sub(x)),
            Expr::And(a, b) => Expr::And(sub(a), sub(b)),
            Expr::Or(a, b) => Expr::Or(sub(a), sub(b)),
            Expr::Not(x) => Expr::Not(sub(x)),
            Expr::Rule {
                dir,
                focus,
                result,
                context,
            } => Expr::Rule {
                dir: *dir,
                focus: sub(focus),
                result: sub(result),
                context: sub(context),
            },
            Expr::Call { name, args } => Expr::Call {
                name: name.clone(),
                args: args.iter().map(|x| x.substitute(bind)).collect(),
            },
            Expr::Var(v) => bind(v).unwrap_or_else(|| self.clone()),
            Expr::Atom(_) | Expr::Str(_) => self.clone(),
        }
    }

    /// Calls made anywhere inside the term, as `(name, arity)`.
    pub fn calls(&self, out: &mut Vec<(String, usize)>) {
        match self {
            Expr::Concat(xs) | Expr::Union(xs) => xs.iter().for_each(|x| x.calls(out)),
            Expr::Star(x) | Expr::Plus(x) | Expr::Optional(x) | Expr::Not(x) => x.calls(out),
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.calls(out);
                b.calls(out);
            }
            Expr::Rule {
                focus,
                result,
                context,
                ..
            } => {
                focus.calls(out);
                result.calls(out);
                context.calls(out);
            }
            Expr::Call { name, args } => {
                out.push((name.clone(), args.len()));
                args.iter().for_each(|x| x.calls(out));
            }
            Expr::Atom(_) | Expr::Var(_) | Expr::Str(_) => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Rule { .. } => 0,
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(_) => 3,
            Expr::Star(_) | Expr::Plus(_) | Expr::Optional(_) => 4,
            _ => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        let list = |f: &mut fmt::Formatter<'_>, xs: &[Expr], open: &str, close: &str| {
            write!(f, "{open}")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                x.fmt_at(f, 1)?;
            }
            write!(f, "{close}")
        };
        match self {
            Expr::Concat(xs) => list(f, xs, "[", "]"),
            Expr::Union(xs) => list(f, xs, "{", "}"),
            Expr::Star(x) => {
                x.fmt_at(f, 4)?;
                write!(f, "*")
            }
            Expr::Plus(x) => {
                x.fmt_at(f, 4)?;
                write!(f, "+")
            }
            Expr::Optional(x) => {
                x.fmt_at(f, 4)?;
                write!(f, "^")
            }
            Expr::And(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, "&")?;
                b.fmt_at(f, 3)
            }
            Expr::Or(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, ";")?;
                b.fmt_at(f, 2)
            }
            Expr::Not(x) => {
                write!(f, "~")?;
                x.fmt_at(f, 3)
            }
            Expr::Rule {
                dir,
                focus,
                result,
                context,
            } => {
                focus.fmt_at(f, 1)?;
                write!(f, " {} ", if *dir == RuleDir::Right { "-r->" } else { "-l->" })?;
                result.fmt_at(f, 1)?;
                write!(f, " / ")?;
                context.fmt_at(f, 1)
            }
            Expr::Call { name, args } => {
                write!(f, "{name}")?;
                if !args.is_empty() {
                    list(f, args, "(", ")")?;
                }
                Ok(())
            }
            Expr::Atom(a) => write!(f, "{}", quote_atom(a)),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Str(s) => write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// `head(Params) := body.`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Expr,
    pub line: usize,
}
