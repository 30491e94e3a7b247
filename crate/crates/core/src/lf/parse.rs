use std::collections::BTreeSet;

use thiserror::Error;

use super::{Quant, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("LF syntax error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        msg: msg.into(),
    })
}

/// Parser with optional declarations of deliberately free variables
/// (context variables such as `w` that no enclosing node binds).
#[derive(Debug, Clone, Default)]
pub struct LfParser {
    free: BTreeSet<String>,
}

/// Parses LF text. Identifiers not bound by an enclosing `lam`, `q`,
/// quantifier or `pro` node are constants.
pub fn parse_lf(text: &str) -> Result<Term, ParseError> {
    LfParser::new().parse(text)
}

impl LfParser {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn free_var(mut self, v: impl Into<String>) -> Self {
        self.free.insert(v.into());
        self
    }

    pub fn free_vars<I, S>(mut self, vs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.free.extend(vs.into_iter().map(Into::into));
        self
    }

    pub fn parse(&self, text: &str) -> Result<Term, ParseError> {
        let tokens = tokenize(text)?;
        let mut p = RawParser { tokens, i: 0 };
        let raw = p.expr()?;
        if let Some(t) = p.tokens.get(p.i) {
            return err(t.pos, "trailing input");
        }
        // In-situ variables are visible across the whole term.
        let mut insitu = BTreeSet::new();
        collect_in_situ(&raw, &mut insitu);
        let mut scope: Vec<String> = Vec::new();
        let mut cx = Resolve {
            insitu: &insitu,
            free: &self.free,
            scope: &mut scope,
        };
        cx.term(&raw)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                out.push(Token { tok: Tok::LParen, pos: i });
                i += 1;
            }
            ')' => {
                out.push(Token { tok: Tok::RParen, pos: i });
                i += 1;
            }
            ',' => {
                out.push(Token { tok: Tok::Comma, pos: i });
                i += 1;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(text[start..i].to_string()),
                    pos: start,
                });
            }
            other => return err(i, format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

/// Syntax tree before variable resolution.
#[derive(Debug, Clone)]
enum Raw {
    Ident(String, usize),
    Call(String, usize, Vec<Raw>),
    /// Postfix application of a compound head: `lam(x,p(x))(a)`.
    Apply(Box<Raw>, Vec<Raw>),
}

impl Raw {
    fn pos(&self) -> usize {
        match self {
            Raw::Ident(_, p) | Raw::Call(_, p, _) => *p,
            Raw::Apply(h, _) => h.pos(),
        }
    }
}

struct RawParser {
    tokens: Vec<Token>,
    i: usize,
}

impl RawParser {
    fn end_pos(&self) -> usize {
        self.tokens.last().map(|t| t.pos + 1).unwrap_or(0)
    }

    fn expr(&mut self) -> Result<Raw, ParseError> {
        let mut e = self.head()?;
        while matches!(self.tokens.get(self.i), Some(Token { tok: Tok::LParen, .. })) {
            self.i += 1;
            e = Raw::Apply(Box::new(e), self.args()?);
        }
        Ok(e)
    }

    fn head(&mut self) -> Result<Raw, ParseError> {
        let Some(tok) = self.tokens.get(self.i).cloned() else {
            return err(self.end_pos(), "unexpected end of input");
        };
        let Tok::Ident(name) = tok.tok else {
            return err(tok.pos, "expected identifier");
        };
        self.i += 1;
        if !matches!(self.tokens.get(self.i), Some(Token { tok: Tok::LParen, .. })) {
            return Ok(Raw::Ident(name, tok.pos));
        }
        self.i += 1;
        Ok(Raw::Call(name, tok.pos, self.args()?))
    }

    /// Arguments after an opening parenthesis, through the closing one.
    fn args(&mut self) -> Result<Vec<Raw>, ParseError> {
        let mut args = vec![self.expr()?];
        loop {
            match self.tokens.get(self.i) {
                Some(Token { tok: Tok::Comma, .. }) => {
                    self.i += 1;
                    args.push(self.expr()?);
                }
                Some(Token { tok: Tok::RParen, .. }) => {
                    self.i += 1;
                    return Ok(args);
                }
                Some(t) => return err(t.pos, "expected `,` or `)`"),
                None => return err(self.end_pos(), "unclosed `(`"),
            }
        }
    }
}

fn collect_in_situ(raw: &Raw, out: &mut BTreeSet<String>) {
    if let Raw::Apply(head, args) = raw {
        collect_in_situ(head, out);
        for a in args {
            collect_in_situ(a, out);
        }
    }
    if let Raw::Call(name, _, args) = raw {
        match (name.as_str(), args.as_slice()) {
            ("q", [_, Raw::Ident(v, _), _]) | ("pro", [Raw::Ident(v, _)]) => {
                out.insert(v.clone());
            }
            _ => {}
        }
        for a in args {
            collect_in_situ(a, out);
        }
    }
}

struct Resolve<'a> {
    insitu: &'a BTreeSet<String>,
    free: &'a BTreeSet<String>,
    scope: &'a mut Vec<String>,
}

impl Resolve<'_> {
    fn is_var(&self, name: &str) -> bool {
        self.scope.iter().any(|v| v == name) || self.insitu.contains(name) || self.free.contains(name)
    }

    fn binder(raw: &Raw) -> Result<String, ParseError> {
        match raw {
            Raw::Ident(v, pos) => {
                if is_reserved(v) {
                    err(*pos, format!("`{v}` is reserved and cannot be a variable"))
                } else {
                    Ok(v.clone())
                }
            }
            other => err(other.pos(), "expected a variable"),
        }
    }

    fn under(&mut self, var: &str, raw: &Raw) -> Result<Term, ParseError> {
        self.scope.push(var.to_string());
        let t = self.term(raw);
        self.scope.pop();
        t
    }

    fn term(&mut self, raw: &Raw) -> Result<Term, ParseError> {
        match raw {
            Raw::Ident(name, _) if name == "true" => Ok(Term::True),
            Raw::Ident(name, _) => Ok(if self.is_var(name) {
                Term::Var(name.clone())
            } else {
                Term::Const(name.clone())
            }),
            Raw::Call(name, pos, args) => self.call(name, *pos, args),
            Raw::Apply(head, args) => {
                let h = self.term(head)?;
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                Ok(Term::app(h, args))
            }
        }
    }

    fn call(&mut self, name: &str, pos: usize, args: &[Raw]) -> Result<Term, ParseError> {
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                err(pos, format!("`{name}` takes {n} arguments, got {}", args.len()))
            }
        };
        match name {
            "lam" => {
                arity(2)?;
                let v = Self::binder(&args[0])?;
                Ok(Term::lam(v.clone(), self.under(&v, &args[1])?))
            }
            "q" => {
                arity(3)?;
                let quant = match &args[0] {
                    Raw::Ident(q, qpos) => Quant::from_keyword(q)
                        .map_or_else(|| err(*qpos, format!("unknown quantifier `{q}`")), Ok)?,
                    other => return err(other.pos(), "expected a quantifier"),
                };
                let v = Self::binder(&args[1])?;
                Ok(Term::qterm(quant, v.clone(), self.under(&v, &args[2])?))
            }
            "pro" => {
                arity(1)?;
                Ok(Term::Pro(Self::binder(&args[0])?))
            }
            "and" => {
                arity(2)?;
                Ok(Term::and(self.term(&args[0])?, self.term(&args[1])?))
            }
            "impl" => {
                arity(2)?;
                Ok(Term::implies(self.term(&args[0])?, self.term(&args[1])?))
            }
            "true" => err(pos, "`true` takes no arguments"),
            _ => {
                if let Some(quant) = Quant::from_keyword(name) {
                    arity(3)?;
                    let v = Self::binder(&args[0])?;
                    self.scope.push(v.clone());
                    let r = self.term(&args[1]);
                    let b = self.term(&args[2]);
                    self.scope.pop();
                    return Ok(Term::scoped(quant, v, r?, b?));
                }
                let head = if self.is_var(name) {
                    Term::Var(name.to_string())
                } else {
                    Term::Const(name.to_string())
                };
                let args = args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                Ok(Term::app(head, args))
            }
        }
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(s, "lam" | "q" | "pro" | "and" | "impl" | "true") || Quant::from_keyword(s).is_some()
}
