use std::collections::HashSet;

use super::Term;

/// Free variables in order of first occurrence in a left-to-right preorder
/// walk, without duplicates.
pub fn free_vars(t: &Term) -> Vec<String> {
    let mut out = Vec::new();
    let mut bound = Vec::new();
    collect_free(t, &mut bound, &mut out);
    out
}

/// Free variables of an iterator's parameters (everything but the
/// scrutinee), in the same order `free_vars` would list them. Returns an
/// empty list for non-iterators.
pub fn param_free_vars(t: &Term) -> Vec<String> {
    let mut out = Vec::new();
    let mut bound = Vec::new();
    match t {
        Term::IterBool {
            on_true, on_false, ..
        } => {
            collect_free(on_true, &mut bound, &mut out);
            collect_free(on_false, &mut bound, &mut out);
        }
        Term::IterNat {
            binder, step, zero, ..
        } => {
            bound.push(binder.as_str());
            collect_free(step, &mut bound, &mut out);
            bound.pop();
            collect_free(zero, &mut bound, &mut out);
        }
        Term::IterList {
            head,
            acc,
            step,
            nil,
            ..
        } => {
            bound.push(head.as_str());
            bound.push(acc.as_str());
            collect_free(step, &mut bound, &mut out);
            bound.clear();
            collect_free(nil, &mut bound, &mut out);
        }
        _ => {}
    }
    out
}

fn collect_free<'a>(t: &'a Term, bound: &mut Vec<&'a str>, out: &mut Vec<String>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(&x.as_str()) && !out.iter().any(|y| y == x) {
                out.push(x.clone());
            }
        }
        Term::Abs(x, _, body) => {
            bound.push(x);
            collect_free(body, bound, out);
            bound.pop();
        }
        Term::App(a, b) | Term::Cons(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Term::Suc(p) => collect_free(p, bound, out),
        Term::True | Term::False | Term::Zero | Term::Nil => {}
        Term::IterBool {
            on_true,
            on_false,
            scrutinee,
        } => {
            collect_free(on_true, bound, out);
            collect_free(on_false, bound, out);
            collect_free(scrutinee, bound, out);
        }
        Term::IterNat {
            binder,
            step,
            zero,
            scrutinee,
        } => {
            bound.push(binder);
            collect_free(step, bound, out);
            bound.pop();
            collect_free(zero, bound, out);
            collect_free(scrutinee, bound, out);
        }
        Term::IterList {
            head,
            acc,
            step,
            nil,
            scrutinee,
        } => {
            bound.push(head);
            bound.push(acc);
            collect_free(step, bound, out);
            bound.pop();
            bound.pop();
            collect_free(nil, bound, out);
            collect_free(scrutinee, bound, out);
        }
    }
}

fn occurs_free(x: &str, t: &Term) -> bool {
    free_vars(t).iter().any(|y| y == x)
}

/// A name derived from `base` that is not in `avoid`: the base with any
/// numeric suffix stripped, followed by the least positive suffix that is
/// not taken.
pub fn fresh_name(base: &str, avoid: &HashSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (1..)
        .map(|n| format!("{stem}{n}"))
        .find(|candidate| !avoid.contains(candidate))
        .expect("unbounded suffix supply")
}

/// Capture-avoiding substitution of `u` for the free occurrences of `x`
/// in `t`.
pub fn subst(t: &Term, x: &str, u: &Term) -> Term {
    let fv_u: HashSet<String> = free_vars(u).into_iter().collect();
    Subst { x, u, fv_u: &fv_u }.go(t)
}

struct Subst<'a> {
    x: &'a str,
    u: &'a Term,
    fv_u: &'a HashSet<String>,
}

impl Subst<'_> {
    fn go(&self, t: &Term) -> Term {
        match t {
            Term::Var(y) => {
                if y == self.x {
                    self.u.clone()
                } else {
                    t.clone()
                }
            }
            Term::Abs(y, ty, body) => {
                let (names, body) = self.under_binders(&[y], body);
                Term::Abs(names[0].clone(), ty.clone(), Box::new(body))
            }
            Term::App(a, b) => Term::App(Box::new(self.go(a)), Box::new(self.go(b))),
            Term::Cons(a, b) => Term::Cons(Box::new(self.go(a)), Box::new(self.go(b))),
            Term::Suc(p) => Term::Suc(Box::new(self.go(p))),
            Term::True | Term::False | Term::Zero | Term::Nil => t.clone(),
            Term::IterBool {
                on_true,
                on_false,
                scrutinee,
            } => Term::IterBool {
                on_true: Box::new(self.go(on_true)),
                on_false: Box::new(self.go(on_false)),
                scrutinee: Box::new(self.go(scrutinee)),
            },
            Term::IterNat {
                binder,
                step,
                zero,
                scrutinee,
            } => {
                let (names, step) = self.under_binders(&[binder], step);
                Term::IterNat {
                    binder: names[0].clone(),
                    step: Box::new(step),
                    zero: Box::new(self.go(zero)),
                    scrutinee: Box::new(self.go(scrutinee)),
                }
            }
            Term::IterList {
                head,
                acc,
                step,
                nil,
                scrutinee,
            } => {
                let (names, step) = self.under_binders(&[head, acc], step);
                Term::IterList {
                    head: names[0].clone(),
                    acc: names[1].clone(),
                    step: Box::new(step),
                    nil: Box::new(self.go(nil)),
                    scrutinee: Box::new(self.go(scrutinee)),
                }
            }
        }
    }

    /// Substitutes under `binders`, renaming any binder that would capture a
    /// free variable of the substituted term.
    fn under_binders(&self, binders: &[&String], body: &Term) -> (Vec<String>, Term) {
        let names: Vec<String> = binders.iter().map(|b| b.to_string()).collect();
        if names.iter().any(|b| b == self.x) || !occurs_free(self.x, body) {
            return (names, body.clone());
        }
        let mut names = names;
        let mut body = body.clone();
        for i in 0..names.len() {
            if !self.fv_u.contains(&names[i]) {
                continue;
            }
            let mut avoid: HashSet<String> = self.fv_u.clone();
            avoid.extend(free_vars(&body));
            avoid.insert(self.x.to_string());
            avoid.extend(names.iter().cloned());
            let fresh = fresh_name(&names[i], &avoid);
            body = subst(&body, &names[i], &Term::Var(fresh.clone()));
            names[i] = fresh;
        }
        (names, self.go(&body))
    }
}

/// Equality up to consistent renaming of bound variables. Type annotations
/// on abstractions must agree.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    AlphaEq::default().eq(t, u)
}

#[derive(Default)]
struct AlphaEq<'a> {
    left: Vec<&'a str>,
    right: Vec<&'a str>,
}

impl<'a> AlphaEq<'a> {
    fn lookup(env: &[&str], x: &str) -> Option<usize> {
        env.iter().rev().position(|y| *y == x)
    }

    fn eq(&mut self, t: &'a Term, u: &'a Term) -> bool {
        match (t, u) {
            (Term::Var(x), Term::Var(y)) => {
                match (Self::lookup(&self.left, x), Self::lookup(&self.right, y)) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::Abs(x, tx, bx), Term::Abs(y, ty, by)) => {
                tx == ty && self.bind(&[x], &[y], bx, by)
            }
            (Term::App(a, b), Term::App(c, d)) | (Term::Cons(a, b), Term::Cons(c, d)) => {
                self.eq(a, c) && self.eq(b, d)
            }
            (Term::Suc(a), Term::Suc(b)) => self.eq(a, b),
            (Term::True, Term::True)
            | (Term::False, Term::False)
            | (Term::Zero, Term::Zero)
            | (Term::Nil, Term::Nil) => true,
            (
                Term::IterBool {
                    on_true: a1,
                    on_false: b1,
                    scrutinee: s1,
                },
                Term::IterBool {
                    on_true: a2,
                    on_false: b2,
                    scrutinee: s2,
                },
            ) => self.eq(a1, a2) && self.eq(b1, b2) && self.eq(s1, s2),
            (
                Term::IterNat {
                    binder: x1,
                    step: st1,
                    zero: z1,
                    scrutinee: s1,
                },
                Term::IterNat {
                    binder: x2,
                    step: st2,
                    zero: z2,
                    scrutinee: s2,
                },
            ) => self.bind(&[x1], &[x2], st1, st2) && self.eq(z1, z2) && self.eq(s1, s2),
            (
                Term::IterList {
                    head: h1,
                    acc: a1,
                    step: st1,
                    nil: n1,
                    scrutinee: s1,
                },
                Term::IterList {
                    head: h2,
                    acc: a2,
                    step: st2,
                    nil: n2,
                    scrutinee: s2,
                },
            ) => self.bind(&[h1, a1], &[h2, a2], st1, st2) && self.eq(n1, n2) && self.eq(s1, s2),
            _ => false,
        }
    }

    fn bind(&mut self, xs: &[&'a String], ys: &[&'a String], t: &'a Term, u: &'a Term) -> bool {
        let (nl, nr) = (self.left.len(), self.right.len());
        self.left.extend(xs.iter().map(|x| x.as_str()));
        self.right.extend(ys.iter().map(|y| y.as_str()));
        let ok = self.eq(t, u);
        self.left.truncate(nl);
        self.right.truncate(nr);
        ok
    }
}

/// Number of iterator occurrences in `t`, parameters included.
pub fn iterator_count(t: &Term) -> usize {
    let own = usize::from(t.is_iterator());
    own + children(t).into_iter().map(iterator_count).sum::<usize>()
}

/// Number of AST nodes.
pub fn size(t: &Term) -> usize {
    1 + children(t).into_iter().map(size).sum::<usize>()
}

/// Immediate subterms in preorder.
pub(crate) fn children(t: &Term) -> Vec<&Term> {
    match t {
        Term::Var(_) | Term::True | Term::False | Term::Zero | Term::Nil => vec![],
        Term::Abs(_, _, b) | Term::Suc(b) => vec![b],
        Term::App(a, b) | Term::Cons(a, b) => vec![a, b],
        Term::IterBool {
            on_true,
            on_false,
            scrutinee,
        } => vec![on_true, on_false, scrutinee],
        Term::IterNat {
            step,
            zero,
            scrutinee,
            ..
        } => vec![step, zero, scrutinee],
        Term::IterList {
            step,
            nil,
            scrutinee,
            ..
        } => vec![step, nil, scrutinee],
    }
}
