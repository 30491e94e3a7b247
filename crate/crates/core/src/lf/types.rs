use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use super::Term;

/// Simple types over the atoms `e` and `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemType {
    E,
    T,
    Fn(Box<SemType>, Box<SemType>),
}

impl SemType {
    pub fn func(arg: SemType, result: SemType) -> SemType {
        SemType::Fn(Box::new(arg), Box::new(result))
    }

    /// `a1 -> a2 -> ... -> result`
    pub fn curried(args: impl IntoIterator<Item = SemType>, result: SemType) -> SemType {
        let args: Vec<_> = args.into_iter().collect();
        args.into_iter()
            .rev()
            .fold(result, |acc, a| SemType::func(a, acc))
    }

    /// Argument types and final atom.
    pub fn uncurry(&self) -> (Vec<&SemType>, &SemType) {
        let mut args = Vec::new();
        let mut cur = self;
        while let SemType::Fn(a, r) = cur {
            args.push(&**a);
            cur = r;
        }
        (args, cur)
    }

    pub fn is_atom(&self) -> bool {
        !matches!(self, SemType::Fn(..))
    }

    /// True for `t` and for function types whose result chain ends in `t`.
    pub fn ends_in_t(&self) -> bool {
        matches!(self.uncurry().1, SemType::T)
    }

    /// Number of atoms.
    pub fn size(&self) -> usize {
        match self {
            SemType::E | SemType::T => 1,
            SemType::Fn(a, r) => a.size() + r.size(),
        }
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemType::E => f.write_str("e"),
            SemType::T => f.write_str("t"),
            SemType::Fn(a, r) => {
                if a.is_atom() {
                    write!(f, "{a}->{r}")
                } else {
                    write!(f, "({a})->{r}")
                }
            }
        }
    }
}

impl Serialize for SemType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("type clash at `{term}`: expected {expected}, found {found}")]
    Mismatch {
        term: String,
        expected: SemType,
        found: SemType,
    },
    #[error("`{term}` is applied but is not a function")]
    NotAFunction { term: String },
    #[error("`{term}` cannot have function type {expected}")]
    NotFunctionShaped { term: String, expected: SemType },
}

/// Typing context. Variables of unknown type map to `None`.
#[derive(Debug, Clone, Default)]
pub struct TypeEnv {
    scopes: Vec<(String, Option<SemType>)>,
}

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: impl Into<String>, ty: SemType) -> Self {
        self.scopes.push((var.into(), Some(ty)));
        self
    }

    fn push(&mut self, var: &str, ty: Option<SemType>) {
        self.scopes.push((var.to_string(), ty));
    }

    fn pop(&mut self) {
        self.scopes.pop();
    }

    fn lookup(&self, var: &str) -> Option<&SemType> {
        self.scopes
            .iter()
            .rev()
            .find(|(v, _)| v == var)
            .and_then(|(_, t)| t.as_ref())
    }
}

/// Checks `t` against an expected type. Constants are untyped predicate
/// symbols and accept any type; everything else is checked structurally.
pub fn check_type(t: &Term, expected: &SemType, env: &mut TypeEnv) -> Result<(), TypeError> {
    match (t, expected) {
        (Term::Const(_), _) => Ok(()),
        (Term::Lam(v, b), SemType::Fn(a, r)) => {
            env.push(v, Some((**a).clone()));
            let res = check_type(b, r, env);
            env.pop();
            res
        }
        (Term::Lam(..), _) => Err(TypeError::NotFunctionShaped {
            term: t.to_string(),
            expected: expected.clone(),
        }),
        (Term::App(h, args), _) if matches!(**h, Term::Const(_)) => {
            for a in args {
                synth_type(a, env)?;
            }
            Ok(())
        }
        _ => match synth_type(t, env)? {
            Some(found) if &found != expected => Err(TypeError::Mismatch {
                term: t.to_string(),
                expected: expected.clone(),
                found,
            }),
            _ => Ok(()),
        },
    }
}

/// Infers a type where one is determined, checking subterms on the way.
pub fn synth_type(t: &Term, env: &mut TypeEnv) -> Result<Option<SemType>, TypeError> {
    match t {
        Term::Const(_) => Ok(None),
        Term::Var(v) => Ok(env.lookup(v).cloned()),
        Term::True => Ok(Some(SemType::T)),
        Term::Pro(_) => Ok(Some(SemType::E)),
        Term::QTerm {
            var, restrictor, ..
        } => {
            env.push(var, Some(SemType::E));
            let r = check_type(restrictor, &SemType::T, env);
            env.pop();
            r?;
            Ok(Some(SemType::E))
        }
        Term::Scoped {
            var,
            restrictor,
            body,
            ..
        } => {
            env.push(var, Some(SemType::E));
            let r = check_type(restrictor, &SemType::T, env)
                .and_then(|_| check_type(body, &SemType::T, env));
            env.pop();
            r?;
            Ok(Some(SemType::T))
        }
        Term::And(l, r) | Term::Impl(l, r) => {
            check_type(l, &SemType::T, env)?;
            check_type(r, &SemType::T, env)?;
            Ok(Some(SemType::T))
        }
        Term::Lam(v, b) => {
            env.push(v, None);
            let r = synth_type(b, env);
            env.pop();
            r?;
            Ok(None)
        }
        Term::App(h, args) => match &**h {
            Term::Const(_) => {
                for a in args {
                    synth_type(a, env)?;
                }
                Ok(None)
            }
            Term::Lam(v, body) => {
                let arg_ty = synth_type(&args[0], env)?;
                env.push(v, arg_ty);
                let body_ty = synth_type(body, env);
                env.pop();
                let Some(mut ty) = body_ty? else {
                    for a in &args[1..] {
                        synth_type(a, env)?;
                    }
                    return Ok(None);
                };
                for a in &args[1..] {
                    match ty {
                        SemType::Fn(param, result) => {
                            check_type(a, &param, env)?;
                            ty = *result;
                        }
                        _ => return Err(TypeError::NotAFunction { term: body.to_string() }),
                    }
                }
                Ok(Some(ty))
            }
            Term::True
            | Term::And(..)
            | Term::Impl(..)
            | Term::Scoped { .. }
            | Term::QTerm { .. }
            | Term::Pro(_) => Err(TypeError::NotAFunction { term: h.to_string() }),
            _ => {
                let Some(mut ty) = synth_type(h, env)? else {
                    for a in args {
                        synth_type(a, env)?;
                    }
                    return Ok(None);
                };
                for a in args {
                    match ty {
                        SemType::Fn(param, result) => {
                            check_type(a, &param, env)?;
                            ty = *result;
                        }
                        _ => return Err(TypeError::NotAFunction { term: h.to_string() }),
                    }
                }
                Ok(Some(ty))
            }
        },
    }
}
