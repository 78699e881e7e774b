use crate::alphabet::TypeFormula;
use crate::enrich::RuleDir;
use crate::error::{Error, Result};

use super::ast::{Expr, MacroDef};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Star,
    Plus,
    Caret,
    Amp,
    Semi,
    Tilde,
    Slash,
    Dot,
    Define,
    Rule(RuleDir),
    Ident(String),
    Var(String),
    Quoted(String),
    Str(String),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
        Tok::Quoted(s) => format!("`'{s}'`"),
        Tok::Str(s) => format!("string \"{s}\""),
        Tok::Eof => "end of input".to_string(),
        Tok::Rule(RuleDir::Right) => "`-r->`".to_string(),
        Tok::Rule(RuleDir::Left) => "`-l->`".to_string(),
        other => {
            let s = match other {
                Tok::LBracket => "[",
                Tok::RBracket => "]",
                Tok::LBrace => "{",
                Tok::RBrace => "}",
                Tok::LParen => "(",
                Tok::RParen => ")",
                Tok::Comma => ",",
                Tok::Star => "*",
                Tok::Plus => "+",
                Tok::Caret => "^",
                Tok::Amp => "&",
                Tok::Semi => ";",
                Tok::Tilde => "~",
                Tok::Slash => "/",
                Tok::Dot => ".",
                _ => ":=",
            };
            format!("`{s}`")
        }
    }
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: String| Error::Parse {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let simple = match c {
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '*' => Some(Tok::Star),
            '+' => Some(Tok::Plus),
            '^' => Some(Tok::Caret),
            '&' => Some(Tok::Amp),
            ';' => Some(Tok::Semi),
            '~' => Some(Tok::Tilde),
            '/' => Some(Tok::Slash),
            '.' => Some(Tok::Dot),
            _ => None,
        };
        let tok = if let Some(t) = simple {
            advance(1, &mut i, &mut col);
            t
        } else if c == ':' && chars.get(i + 1) == Some(&'=') {
            advance(2, &mut i, &mut col);
            Tok::Define
        } else if c == '-' {
            let arrow: String = chars[i..chars.len().min(i + 4)].iter().collect();
            let dir = match arrow.as_str() {
                "-r->" => RuleDir::Right,
                "-l->" => RuleDir::Left,
                _ => return Err(err(tl, tc, "expected `-r->` or `-l->`".into())),
            };
            advance(4, &mut i, &mut col);
            Tok::Rule(dir)
        } else if c == '\'' || c == '"' {
            let mut s = String::new();
            advance(1, &mut i, &mut col);
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(err(tl, tc, "unterminated quote".into()));
                    }
                    Some('\\') if chars.get(i + 1).is_some() => {
                        s.push(chars[i + 1]);
                        advance(2, &mut i, &mut col);
                    }
                    Some(&d) if d == c => {
                        advance(1, &mut i, &mut col);
                        break;
                    }
                    Some(&d) => {
                        s.push(d);
                        advance(1, &mut i, &mut col);
                    }
                }
            }
            if c == '\'' {
                Tok::Quoted(s)
            } else {
                Tok::Str(s)
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
                col += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if c.is_ascii_uppercase() || c == '_' {
                Tok::Var(word)
            } else {
                Tok::Ident(word)
            }
        } else {
            return Err(err(tl, tc, format!("unexpected character `{c}`")));
        };
        out.push(Token {
            tok,
            line: tl,
            column: tc,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> Error {
        let t = &self.toks[self.pos];
        Error::Parse {
            line: t.line,
            column: t.column,
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                describe(&want),
                describe(self.peek())
            )))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let focus = self.semi()?;
        if let Tok::Rule(dir) = *self.peek() {
            self.next();
            let result = self.semi()?;
            self.expect(Tok::Slash)?;
            let context = self.semi()?;
            return Ok(Expr::Rule {
                dir,
                focus: Box::new(focus),
                result: Box::new(result),
                context: Box::new(context),
            });
        }
        Ok(focus)
    }

    fn semi(&mut self) -> Result<Expr> {
        let mut left = self.and()?;
        while *self.peek() == Tok::Semi {
            self.next();
            let right = self.and()?;
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.next();
            let right = self.unary()?;
            left = Expr::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Tilde {
            self.next();
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr> {
        let mut e = self.primary()?;
        loop {
            e = match self.peek() {
                Tok::Star => Expr::Star(Box::new(e)),
                Tok::Plus => Expr::Plus(Box::new(e)),
                Tok::Caret => Expr::Optional(Box::new(e)),
                _ => return Ok(e),
            };
            self.next();
        }
    }

    fn list(&mut self, close: Tok) -> Result<Vec<Expr>> {
        let mut items = Vec::new();
        if *self.peek() == close {
            self.next();
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if *self.peek() == Tok::Comma {
                self.next();
            } else {
                self.expect(close)?;
                return Ok(items);
            }
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.next() {
            Tok::LBracket => Ok(Expr::Concat(self.list(Tok::RBracket)?)),
            Tok::LBrace => Ok(Expr::Union(self.list(Tok::RBrace)?)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let args = if *self.peek() == Tok::LParen {
                    self.next();
                    self.list(Tok::RParen)?
                } else {
                    Vec::new()
                };
                Ok(Expr::Call { name, args })
            }
            Tok::Var(v) => Ok(Expr::Var(v)),
            Tok::Quoted(a) => Ok(Expr::Atom(a)),
            Tok::Str(s) => Ok(Expr::Str(s)),
            other => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error(format!("expected an expression, found {}", describe(&other))))
            }
        }
    }

    fn definition(&mut self) -> Result<MacroDef> {
        let line = self.toks[self.pos].line;
        let name = match self.next() {
            Tok::Ident(n) => n,
            other => {
                self.pos = self.pos.saturating_sub(1);
                return Err(self.error(format!("expected a macro name, found {}", describe(&other))));
            }
        };
        let mut params = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            loop {
                match self.next() {
                    Tok::Var(v) => params.push(v),
                    other => {
                        self.pos = self.pos.saturating_sub(1);
                        return Err(self.error(format!(
                            "macro parameters must be variables, found {}",
                            describe(&other)
                        )));
                    }
                }
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    self.expect(Tok::RParen)?;
                    break;
                }
            }
        }
        self.expect(Tok::Define)?;
        let body = self.expr()?;
        self.expect(Tok::Dot)?;
        Ok(MacroDef {
            name,
            params,
            body,
            line,
        })
    }
}

/// Parses a grammar file: a sequence of `head := body.` definitions.
pub fn parse_grammar(src: &str) -> Result<Vec<MacroDef>> {
    let mut p = Parser::new(src)?;
    let mut defs = Vec::new();
    while *p.peek() != Tok::Eof {
        defs.push(p.definition()?);
    }
    Ok(defs)
}

/// Parses one expression, optionally terminated by `.`.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if *p.peek() == Tok::Dot {
        p.next();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", describe(p.peek()))));
    }
    Ok(e)
}

/// Reads a term as a type formula.
pub fn to_formula(e: &Expr) -> Result<TypeFormula> {
    Ok(match e {
        Expr::Atom(a) => TypeFormula::Atom(a.clone()),
        Expr::Call { name, args } if args.is_empty() => TypeFormula::Atom(name.clone()),
        Expr::And(a, b) => to_formula(a)?.and(to_formula(b)?),
        Expr::Or(a, b) => to_formula(a)?.or(to_formula(b)?),
        Expr::Not(a) => to_formula(a)?.not(),
        Expr::Var(v) => return Err(Error::UnboundVariable(v.clone())),
        other => {
            return Err(Error::Type(format!("`{other}` is not a type formula")));
        }
    })
}

/// Parses a type formula such as `stressed&'Ons'`.
pub fn parse_formula(src: &str) -> Result<TypeFormula> {
    to_formula(&parse_expr(src)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_expr("~a&b;c").unwrap();
        assert_eq!(e.to_string(), "~a&b;c");
        let e = parse_expr("[consumer(a)*, b^]").unwrap();
        assert!(matches!(&e, Expr::Concat(xs) if matches!(xs[0], Expr::Star(_)) && matches!(xs[1], Expr::Optional(_))));
        let e = parse_expr("~x*").unwrap();
        assert!(matches!(&e, Expr::Not(inner) if matches!(**inner, Expr::Star(_))));
        let r = parse_expr("( segment -r-> ons / 'Nuc' )").unwrap();
        assert!(matches!(r, Expr::Rule { dir: RuleDir::Right, .. }));
        assert_eq!(r.to_string(), "segment -r-> ons / 'Nuc'");
    }

    #[test]
    fn definitions_and_comments() {
        let src = "% a comment\nf(X, Y) := [X, Y]. % trailing\ng := f(a, 'E').\n";
        let defs = parse_grammar(src).unwrap();
        assert_eq!(defs.len(), 2);
        assert_eq!(defs[0].params, vec!["X", "Y"]);
        assert_eq!(defs[1].line, 3);
        assert_eq!(defs[1].body.to_string(), "f(a,'E')");
    }

    #[test]
    fn error_positions() {
        match parse_grammar("f := [a,\n  b}.") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 4)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("a -x-> b"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("'open"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("a b"), Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip() {
        for src in [
            "[consumer(':1'),seek([producer(a&':0'&unstressed),consumer(stressed&'Ons')])]",
            "{producer(p&final),producer(m&medial&cod)}",
            "stringToSegments(\"s@lOg\")&has_prefinal_syllable",
            "([consumer(segment)*,consumer(segment&~ons)])^",
            "(a;b)&~(c;d)",
        ] {
            let e = parse_expr(src).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{src}");
        }
    }

    #[test]
    fn formulas() {
        let f = parse_formula("stressed&'Ons'").unwrap();
        assert_eq!(f, TypeFormula::atom("stressed").and(TypeFormula::atom("Ons")));
        assert!(parse_formula("[a]").is_err());
        assert!(matches!(parse_formula("X&a"), Err(Error::UnboundVariable(_))));
    }
}
