//! The source language: simply-typed λ-calculus with booleans, naturals,
//! lists and one iteration operator per data type.

mod ops;
mod parse;
mod pretty;
mod typing;

use std::fmt;

pub(crate) use ops::children as children_of;
pub use ops::{alpha_eq, free_vars, fresh_name, iterator_count, param_free_vars, size, subst};
pub use parse::{parse, parse_type, ParseError};
pub use typing::{elaborate, typecheck, TypeError};

/// Types. Arrows are right-associative in the concrete syntax.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Bool,
    Nat,
    List(Box<Type>),
    Arrow(Box<Type>, Box<Type>),
}

impl Type {
    pub fn list(elem: Type) -> Type {
        Type::List(Box::new(elem))
    }

    pub fn arrow(dom: Type, cod: Type) -> Type {
        Type::Arrow(Box::new(dom), Box::new(cod))
    }

    /// Types whose values can be observed completely (numerals, booleans
    /// and lists of such).
    pub fn is_first_order(&self) -> bool {
        match self {
            Type::Bool | Type::Nat => true,
            Type::List(elem) => elem.is_first_order(),
            Type::Arrow(..) => false,
        }
    }
}

/// Terms. Iterator steps are stored together with their binders: the
/// `iternat` step binds the recursive result, the `iterlist` step binds the
/// head and the recursive result on the tail.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Abs(String, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    True,
    False,
    IterBool {
        on_true: Box<Term>,
        on_false: Box<Term>,
        scrutinee: Box<Term>,
    },
    Zero,
    Suc(Box<Term>),
    IterNat {
        binder: String,
        step: Box<Term>,
        zero: Box<Term>,
        scrutinee: Box<Term>,
    },
    Nil,
    Cons(Box<Term>, Box<Term>),
    IterList {
        head: String,
        acc: String,
        step: Box<Term>,
        nil: Box<Term>,
        scrutinee: Box<Term>,
    },
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn abs(name: &str, ty: Type, body: Term) -> Term {
        Term::Abs(name.to_string(), ty, Box::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    pub fn suc(pred: Term) -> Term {
        Term::Suc(Box::new(pred))
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::Cons(Box::new(head), Box::new(tail))
    }

    pub fn iter_bool(on_true: Term, on_false: Term, scrutinee: Term) -> Term {
        Term::IterBool {
            on_true: Box::new(on_true),
            on_false: Box::new(on_false),
            scrutinee: Box::new(scrutinee),
        }
    }

    pub fn iter_nat(binder: &str, step: Term, zero: Term, scrutinee: Term) -> Term {
        Term::IterNat {
            binder: binder.to_string(),
            step: Box::new(step),
            zero: Box::new(zero),
            scrutinee: Box::new(scrutinee),
        }
    }

    pub fn iter_list(head: &str, acc: &str, step: Term, nil: Term, scrutinee: Term) -> Term {
        Term::IterList {
            head: head.to_string(),
            acc: acc.to_string(),
            step: Box::new(step),
            nil: Box::new(nil),
            scrutinee: Box::new(scrutinee),
        }
    }

    /// The numeral `suc^n 0`.
    pub fn numeral(n: usize) -> Term {
        (0..n).fold(Term::Zero, |t, _| Term::suc(t))
    }

    /// A list literal built from `cons` cells.
    pub fn list(items: impl IntoIterator<Item = Term, IntoIter: DoubleEndedIterator>) -> Term {
        items
            .into_iter()
            .rev()
            .fold(Term::Nil, |tail, head| Term::cons(head, tail))
    }

    /// Weak canonical forms: abstractions and constructor-headed terms.
    pub fn is_canonical(&self) -> bool {
        matches!(
            self,
            Term::Abs(..)
                | Term::True
                | Term::False
                | Term::Zero
                | Term::Suc(_)
                | Term::Nil
                | Term::Cons(..)
        )
    }

    pub fn is_iterator(&self) -> bool {
        matches!(
            self,
            Term::IterBool { .. } | Term::IterNat { .. } | Term::IterList { .. }
        )
    }

    /// Reads `suc^n 0` back as `n`.
    pub fn as_numeral(&self) -> Option<usize> {
        let mut n = 0;
        let mut cur = self;
        loop {
            match cur {
                Term::Zero => return Some(n),
                Term::Suc(p) => {
                    n += 1;
                    cur = p;
                }
                _ => return None,
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        pretty::write_type(f, self, false)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        pretty::write_term(f, self)
    }
}

/// Keywords that cannot be used as variable names.
pub(crate) const KEYWORDS: &[&str] = &[
    "true", "false", "nil", "suc", "cons", "iterbool", "iternat", "iterlist", "bool", "nat", "list",
];
