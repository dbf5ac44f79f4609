use std::fmt::{self, Write};

use super::{Term, Type};

pub(super) fn write_type(f: &mut fmt::Formatter<'_>, ty: &Type, atomic: bool) -> fmt::Result {
    match ty {
        Type::Bool => f.write_str("bool"),
        Type::Nat => f.write_str("nat"),
        Type::List(elem) => {
            if atomic {
                f.write_char('(')?;
            }
            f.write_str("list ")?;
            write_type(f, elem, true)?;
            if atomic {
                f.write_char(')')?;
            }
            Ok(())
        }
        Type::Arrow(dom, cod) => {
            if atomic {
                f.write_char('(')?;
            }
            // The domain of an arrow needs parentheses only when it is itself an arrow.
            match **dom {
                Type::Arrow(..) => write_type(f, dom, true)?,
                _ => write_type(f, dom, false)?,
            }
            f.write_str(" -> ")?;
            write_type(f, cod, false)?;
            if atomic {
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

pub(super) fn write_term(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::Abs(x, ty, body) => {
            write!(f, "\\{x}:")?;
            // `.` ends the annotation, so even arrows need no parentheses here.
            write_type(f, ty, false)?;
            f.write_str(". ")?;
            write_term(f, body)
        }
        _ => write_app(f, t),
    }
}

fn write_app(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::App(fun, arg) => {
            write_app(f, fun)?;
            f.write_char(' ')?;
            write_atom(f, arg)
        }
        Term::Suc(p) => {
            f.write_str("suc ")?;
            write_atom(f, p)
        }
        Term::Cons(h, tl) => {
            f.write_str("cons ")?;
            write_atom(f, h)?;
            f.write_char(' ')?;
            write_atom(f, tl)
        }
        Term::IterBool {
            on_true,
            on_false,
            scrutinee,
        } => {
            f.write_str("iterbool <")?;
            write_term(f, on_true)?;
            f.write_str("> <")?;
            write_term(f, on_false)?;
            f.write_str("> ")?;
            write_atom(f, scrutinee)
        }
        Term::IterNat {
            binder,
            step,
            zero,
            scrutinee,
        } => {
            write!(f, "iternat <\\{binder}. ")?;
            write_term(f, step)?;
            f.write_str("> <")?;
            write_term(f, zero)?;
            f.write_str("> ")?;
            write_atom(f, scrutinee)
        }
        Term::IterList {
            head,
            acc,
            step,
            nil,
            scrutinee,
        } => {
            write!(f, "iterlist <\\{head} {acc}. ")?;
            write_term(f, step)?;
            f.write_str("> <")?;
            write_term(f, nil)?;
            f.write_str("> ")?;
            write_atom(f, scrutinee)
        }
        _ => write_atom(f, t),
    }
}

fn write_atom(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::Var(x) => f.write_str(x),
        Term::True => f.write_str("true"),
        Term::False => f.write_str("false"),
        Term::Zero => f.write_str("0"),
        Term::Nil => f.write_str("nil"),
        _ => {
            f.write_char('(')?;
            write_term(f, t)?;
            f.write_char(')')
        }
    }
}
