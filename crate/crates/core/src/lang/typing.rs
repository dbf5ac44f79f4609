//! Type checking. Abstractions carry their annotation; `nil` does not, so
//! the checker solves list element types by first-order unification.
//! Element types that stay unconstrained (the `nil` in `iterbool <nil> <nil>
//! true`, say) default to `nat`.
//!
//! The same machinery elaborates terms whose abstractions have no trusted
//! annotation, which is what reading a net back into a term needs.

use thiserror::Error;

use super::{Term, Type};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("type mismatch in {context} `{subterm}`: expected {expected}, found {found}")]
    Mismatch {
        context: &'static str,
        subterm: String,
        expected: String,
        found: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    Bool,
    Nat,
    List(Box<Ty>),
    Arrow(Box<Ty>, Box<Ty>),
    Meta(usize),
}

impl Ty {
    fn from_type(ty: &Type) -> Ty {
        match ty {
            Type::Bool => Ty::Bool,
            Type::Nat => Ty::Nat,
            Type::List(e) => Ty::List(Box::new(Ty::from_type(e))),
            Type::Arrow(a, b) => Ty::Arrow(Box::new(Ty::from_type(a)), Box::new(Ty::from_type(b))),
        }
    }
}

struct Checker<'a> {
    metas: Vec<Option<Ty>>,
    ctx: Vec<(&'a str, Ty)>,
    unknown: &'a dyn Fn(&str) -> bool,
    /// Metas standing for unannotated abstractions, in preorder.
    holes: Vec<usize>,
}

/// Returns the type of `t`.
pub fn typecheck(t: &Term) -> Result<Type, TypeError> {
    let mut ck = Checker::new(&|_| false);
    let ty = ck.infer(t)?;
    Ok(ck.finish(&ty))
}

/// Elaborates `t`, re-inferring the annotation of every abstraction whose
/// binder satisfies `unknown`. When `expected` is given the result is
/// checked against it first, which fixes otherwise unconstrained binders.
pub fn elaborate(
    t: &Term,
    unknown: &dyn Fn(&str) -> bool,
    expected: Option<&Type>,
) -> Result<(Term, Type), TypeError> {
    let mut ck = Checker::new(unknown);
    let ty = ck.infer(t)?;
    if let Some(expected) = expected {
        ck.unify(&Ty::from_type(expected), &ty, "program", t)?;
    }
    let ty = ck.finish(&ty);
    let mut holes = std::mem::take(&mut ck.holes).into_iter();
    let term = ck.fill(t, &mut holes);
    Ok((term, ty))
}

impl<'a> Checker<'a> {
    fn new(unknown: &'a dyn Fn(&str) -> bool) -> Self {
        Checker {
            metas: Vec::new(),
            ctx: Vec::new(),
            unknown,
            holes: Vec::new(),
        }
    }

    fn fresh(&mut self) -> Ty {
        self.metas.push(None);
        Ty::Meta(self.metas.len() - 1)
    }

    fn resolve(&self, ty: &Ty) -> Ty {
        match ty {
            Ty::Meta(m) => match &self.metas[*m] {
                Some(t) => self.resolve(t),
                None => ty.clone(),
            },
            Ty::List(e) => Ty::List(Box::new(self.resolve(e))),
            Ty::Arrow(a, b) => Ty::Arrow(Box::new(self.resolve(a)), Box::new(self.resolve(b))),
            _ => ty.clone(),
        }
    }

    /// Fully resolved type with unsolved metas defaulted to `nat`.
    fn finish(&self, ty: &Ty) -> Type {
        match self.resolve(ty) {
            Ty::Bool => Type::Bool,
            Ty::Nat | Ty::Meta(_) => Type::Nat,
            Ty::List(e) => Type::list(self.finish(&e)),
            Ty::Arrow(a, b) => Type::arrow(self.finish(&a), self.finish(&b)),
        }
    }

    fn show(&self, ty: &Ty) -> String {
        fn go(ty: &Ty, atomic: bool, out: &mut String) {
            match ty {
                Ty::Bool => out.push_str("bool"),
                Ty::Nat => out.push_str("nat"),
                Ty::Meta(m) => out.push_str(&format!("?{m}")),
                Ty::List(e) => {
                    if atomic {
                        out.push('(');
                    }
                    out.push_str("list ");
                    go(e, true, out);
                    if atomic {
                        out.push(')');
                    }
                }
                Ty::Arrow(a, b) => {
                    if atomic {
                        out.push('(');
                    }
                    go(a, matches!(**a, Ty::Arrow(..)), out);
                    out.push_str(" -> ");
                    go(b, false, out);
                    if atomic {
                        out.push(')');
                    }
                }
            }
        }
        let mut s = String::new();
        go(&self.resolve(ty), false, &mut s);
        s
    }

    fn occurs(&self, m: usize, ty: &Ty) -> bool {
        match self.resolve(ty) {
            Ty::Meta(n) => n == m,
            Ty::List(e) => self.occurs(m, &e),
            Ty::Arrow(a, b) => self.occurs(m, &a) || self.occurs(m, &b),
            _ => false,
        }
    }

    fn unify(
        &mut self,
        expected: &Ty,
        found: &Ty,
        context: &'static str,
        at: &Term,
    ) -> Result<(), TypeError> {
        if self.unify_inner(expected, found) {
            Ok(())
        } else {
            Err(TypeError::Mismatch {
                context,
                subterm: at.to_string(),
                expected: self.show(expected),
                found: self.show(found),
            })
        }
    }

    fn unify_inner(&mut self, a: &Ty, b: &Ty) -> bool {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (Ty::Meta(m), Ty::Meta(n)) if m == n => true,
            (Ty::Meta(m), other) | (other, Ty::Meta(m)) => {
                if self.occurs(*m, other) {
                    return false;
                }
                self.metas[*m] = Some(other.clone());
                true
            }
            (Ty::Bool, Ty::Bool) | (Ty::Nat, Ty::Nat) => true,
            (Ty::List(x), Ty::List(y)) => self.unify_inner(x, y),
            (Ty::Arrow(a1, b1), Ty::Arrow(a2, b2)) => {
                self.unify_inner(a1, a2) && self.unify_inner(b1, b2)
            }
            _ => false,
        }
    }

    fn lookup(&self, x: &str) -> Option<Ty> {
        self.ctx
            .iter()
            .rev()
            .find(|(y, _)| *y == x)
            .map(|(_, ty)| ty.clone())
    }

    fn with<T>(
        &mut self,
        binds: &[(&'a str, Ty)],
        f: impl FnOnce(&mut Self) -> Result<T, TypeError>,
    ) -> Result<T, TypeError> {
        let n = self.ctx.len();
        self.ctx.extend(binds.iter().cloned());
        let r = f(self);
        self.ctx.truncate(n);
        r
    }

    fn infer(&mut self, t: &'a Term) -> Result<Ty, TypeError> {
        match t {
            Term::Var(x) => self.lookup(x).ok_or_else(|| TypeError::Unbound(x.clone())),
            Term::Abs(x, ann, body) => {
                let dom = if (self.unknown)(x) {
                    let m = self.fresh();
                    if let Ty::Meta(id) = m {
                        self.holes.push(id);
                    }
                    m
                } else {
                    Ty::from_type(ann)
                };
                let cod = self.with(&[(x.as_str(), dom.clone())], |ck| ck.infer(body))?;
                Ok(Ty::Arrow(Box::new(dom), Box::new(cod)))
            }
            Term::App(fun, arg) => {
                let tf = self.infer(fun)?;
                let ta = self.infer(arg)?;
                match self.resolve(&tf) {
                    Ty::Arrow(dom, cod) => {
                        self.unify(&dom, &ta, "argument", arg)?;
                        Ok(*cod)
                    }
                    Ty::Meta(_) => {
                        let cod = self.fresh();
                        let want = Ty::Arrow(Box::new(ta), Box::new(cod.clone()));
                        self.unify(&want, &tf, "application", fun)?;
                        Ok(cod)
                    }
                    other => {
                        let cod = self.fresh();
                        Err(TypeError::Mismatch {
                            context: "application",
                            subterm: fun.to_string(),
                            expected: self.show(&Ty::Arrow(Box::new(ta), Box::new(cod))),
                            found: self.show(&other),
                        })
                    }
                }
            }
            Term::True | Term::False => Ok(Ty::Bool),
            Term::Zero => Ok(Ty::Nat),
            Term::Suc(p) => {
                let tp = self.infer(p)?;
                self.unify(&Ty::Nat, &tp, "suc argument", p)?;
                Ok(Ty::Nat)
            }
            Term::Nil => {
                let e = self.fresh();
                Ok(Ty::List(Box::new(e)))
            }
            Term::Cons(h, tl) => {
                let th = self.infer(h)?;
                let tt = self.infer(tl)?;
                let want = Ty::List(Box::new(th));
                self.unify(&want, &tt, "cons tail", tl)?;
                Ok(want)
            }
            Term::IterBool {
                on_true,
                on_false,
                scrutinee,
            } => {
                let ts = self.infer(scrutinee)?;
                self.unify(&Ty::Bool, &ts, "iterbool scrutinee", scrutinee)?;
                let tv = self.infer(on_true)?;
                let tf = self.infer(on_false)?;
                self.unify(&tv, &tf, "iterbool branches", t)?;
                Ok(tv)
            }
            Term::IterNat {
                binder,
                step,
                zero,
                scrutinee,
            } => {
                let ts = self.infer(scrutinee)?;
                self.unify(&Ty::Nat, &ts, "iternat scrutinee", scrutinee)?;
                let tz = self.infer(zero)?;
                let tstep = self.with(&[(binder.as_str(), tz.clone())], |ck| ck.infer(step))?;
                self.unify(&tz, &tstep, "iternat step", step)?;
                Ok(tz)
            }
            Term::IterList {
                head,
                acc,
                step,
                nil,
                scrutinee,
            } => {
                let ts = self.infer(scrutinee)?;
                let elem = self.fresh();
                self.unify(
                    &Ty::List(Box::new(elem.clone())),
                    &ts,
                    "iterlist scrutinee",
                    scrutinee,
                )?;
                let tn = self.infer(nil)?;
                let tstep = self
                    .with(&[(head.as_str(), elem), (acc.as_str(), tn.clone())], |ck| {
                        ck.infer(step)
                    })?;
                self.unify(&tn, &tstep, "iterlist step", step)?;
                Ok(tn)
            }
        }
    }

    /// Rebuilds `t` with the solved annotations, visiting abstractions in
    /// the same order `infer` created their metas.
    fn fill(&self, t: &Term, holes: &mut std::vec::IntoIter<usize>) -> Term {
        match t {
            Term::Abs(x, ann, body) => {
                let ann = if (self.unknown)(x) {
                    let m = holes.next().expect("one meta per unannotated binder");
                    self.finish(&Ty::Meta(m))
                } else {
                    ann.clone()
                };
                Term::Abs(x.clone(), ann, Box::new(self.fill(body, holes)))
            }
            Term::App(a, b) => {
                Term::App(Box::new(self.fill(a, holes)), Box::new(self.fill(b, holes)))
            }
            Term::Cons(a, b) => {
                Term::Cons(Box::new(self.fill(a, holes)), Box::new(self.fill(b, holes)))
            }
            Term::Suc(p) => Term::Suc(Box::new(self.fill(p, holes))),
            Term::Var(_) | Term::True | Term::False | Term::Zero | Term::Nil => t.clone(),
            // `infer` visits the scrutinee of an iterator before its parameters.
            Term::IterBool {
                on_true,
                on_false,
                scrutinee,
            } => {
                let scrutinee = self.fill(scrutinee, holes);
                Term::IterBool {
                    on_true: Box::new(self.fill(on_true, holes)),
                    on_false: Box::new(self.fill(on_false, holes)),
                    scrutinee: Box::new(scrutinee),
                }
            }
            Term::IterNat {
                binder,
                step,
                zero,
                scrutinee,
            } => {
                let scrutinee = self.fill(scrutinee, holes);
                let zero = self.fill(zero, holes);
                Term::IterNat {
                    binder: binder.clone(),
                    step: Box::new(self.fill(step, holes)),
                    zero: Box::new(zero),
                    scrutinee: Box::new(scrutinee),
                }
            }
            Term::IterList {
                head,
                acc,
                step,
                nil,
                scrutinee,
            } => {
                let scrutinee = self.fill(scrutinee, holes);
                let nil = self.fill(nil, holes);
                Term::IterList {
                    head: head.clone(),
                    acc: acc.clone(),
                    step: Box::new(self.fill(step, holes)),
                    nil: Box::new(nil),
                    scrutinee: Box::new(scrutinee),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn ty(s: &str) -> Result<Type, TypeError> {
        typecheck(&parse(s).unwrap())
    }

    #[test]
    fn axioms_and_abstraction() {
        assert_eq!(ty("true").unwrap(), Type::Bool);
        assert_eq!(
            ty("\\x:nat. suc x").unwrap(),
            Type::arrow(Type::Nat, Type::Nat)
        );
    }

    #[test]
    fn iterbool_branches_must_agree() {
        let err = typecheck(&Term::iter_bool(Term::Zero, Term::True, Term::True)).unwrap_err();
        match err {
            TypeError::Mismatch {
                context,
                expected,
                found,
                ..
            } => {
                assert_eq!(context, "iterbool branches");
                assert_eq!((expected.as_str(), found.as_str()), ("nat", "bool"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iterator_rules() {
        assert_eq!(ty("iternat <\\x. suc x> <0> (suc 0)").unwrap(), Type::Nat);
        assert_eq!(
            ty("iterlist <\\x y. cons (suc x) y> <nil> (cons 0 nil)").unwrap(),
            Type::list(Type::Nat)
        );
        assert_eq!(
            ty("iterlist <\\x y. iterbool <y> <false> x> <true> (cons true nil)").unwrap(),
            Type::Bool
        );
        assert!(ty("iternat <\\x. true> <0> 0").is_err());
        assert!(ty("iterlist <\\x y. x> <0> (cons true nil)").is_err());
    }

    #[test]
    fn nil_element_types_are_solved() {
        assert_eq!(ty("cons true nil").unwrap(), Type::list(Type::Bool));
        assert_eq!(ty("nil").unwrap(), Type::list(Type::Nat));
        assert!(ty("cons 0 (cons true nil)").is_err());
    }

    #[test]
    fn unbound_and_bad_application() {
        assert_eq!(ty("x").unwrap_err(), TypeError::Unbound("x".into()));
        assert!(matches!(ty("0 0"), Err(TypeError::Mismatch { .. })));
        assert!(matches!(
            ty("(\\x:nat. x) true"),
            Err(TypeError::Mismatch { .. })
        ));
    }

    #[test]
    fn elaboration_recovers_annotations() {
        let raw = parse("(\\f:nat. f 0) (\\z:nat. iterbool <z> <0> true)").unwrap();
        let unknown = |x: &str| x == "f" || x == "z";
        let (t, ty) = elaborate(&raw, &unknown, None).unwrap();
        assert_eq!(ty, Type::Nat);
        let expected = parse("(\\f:nat -> nat. f 0) (\\z:nat. iterbool <z> <0> true)").unwrap();
        assert_eq!(t, expected);

        let raw = parse("\\x:nat. x").unwrap();
        let (t, _) =
            elaborate(&raw, &|_| true, Some(&Type::arrow(Type::Bool, Type::Bool))).unwrap();
        assert_eq!(t, parse("\\x:bool. x").unwrap());
    }
}
