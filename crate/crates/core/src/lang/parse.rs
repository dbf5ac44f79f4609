//! Lexer and recursive-descent parser for the concrete syntax.
//!
//! ```text
//! term  ::= '\' x ':' type '.' term | app
//! app   ::= head atom*
//! head  ::= 'suc' atom | 'cons' atom atom
//!         | 'iterbool' '<' term '>' '<' term '>' atom
//!         | 'iternat' '<' '\' x '.' term '>' '<' term '>' atom
//!         | 'iterlist' '<' '\' x y '.' term '>' '<' term '>' atom
//!         | atom
//! atom  ::= x | 'true' | 'false' | '0' | 'nil' | '(' term ')'
//! type  ::= tyapp ('->' type)?
//! tyapp ::= 'list' tyapp | 'bool' | 'nat' | '(' type ')'
//! ```
//!
//! `--` starts a comment that runs to the end of the line. `λ` is accepted
//! in place of `\`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::{Term, Type, KEYWORDS};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: BTreeSet<String>,
}

fn expected_suffix(expected: &BTreeSet<String>) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        let items: Vec<&str> = expected.iter().map(String::as_str).collect();
        format!(" (expected one of: {})", items.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Backslash,
    Colon,
    Dot,
    LParen,
    RParen,
    LAngle,
    RAngle,
    Arrow,
    Zero,
    Ident(String),
    Keyword(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Backslash => f.write_str("`\\`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LAngle => f.write_str("`<`"),
            Tok::RAngle => f.write_str("`>`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Zero => f.write_str("`0`"),
            Tok::Ident(x) => write!(f, "identifier `{x}`"),
            Tok::Keyword(k) => write!(f, "`{k}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(source: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = source.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let tok = match c {
            c if c.is_whitespace() => {
                bump!();
                continue;
            }
            '-' => {
                bump!();
                match chars.peek() {
                    Some('-') => {
                        while let Some(&c) = chars.peek() {
                            if c == '\n' {
                                break;
                            }
                            bump!();
                        }
                        continue;
                    }
                    Some('>') => {
                        bump!();
                        Tok::Arrow
                    }
                    _ => {
                        return Err(ParseError {
                            line: l,
                            column: col,
                            message: "unexpected character `-`".into(),
                            expected: ["`->`".to_string(), "`--`".to_string()].into(),
                        })
                    }
                }
            }
            '\\' | 'λ' => {
                bump!();
                Tok::Backslash
            }
            ':' => {
                bump!();
                Tok::Colon
            }
            '.' => {
                bump!();
                Tok::Dot
            }
            '(' => {
                bump!();
                Tok::LParen
            }
            ')' => {
                bump!();
                Tok::RParen
            }
            '<' | '⟨' => {
                bump!();
                Tok::LAngle
            }
            '>' | '⟩' => {
                bump!();
                Tok::RAngle
            }
            '0' => {
                bump!();
                if matches!(chars.peek(), Some(c) if c.is_ascii_alphanumeric()) {
                    return Err(ParseError {
                        line: l,
                        column: col,
                        message: "numeric literals other than `0` are not supported".into(),
                        expected: BTreeSet::new(),
                    });
                }
                Tok::Zero
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                        word.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                match KEYWORDS.iter().find(|k| **k == word) {
                    Some(k) => Tok::Keyword(k),
                    None => Tok::Ident(word),
                }
            }
            other => {
                return Err(ParseError {
                    line: l,
                    column: col,
                    message: format!("unexpected character `{other}`"),
                    expected: BTreeSet::new(),
                })
            }
        };
        out.push(Spanned {
            tok,
            line: l,
            column: col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

/// Parses a complete program.
pub fn parse(source: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let t = p.term()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

/// Parses a type on its own, e.g. `nat -> list bool`.
pub fn parse_type(source: &str) -> Result<Type, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let ty = p.ty()?;
    p.expect(Tok::Eof)?;
    Ok(ty)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let here = &self.toks[self.pos];
        ParseError {
            line: here.line,
            column: here.column,
            message: format!("unexpected {}", here.tok),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&[&tok.to_string()]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.advance();
                Ok(x)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Backslash {
            self.advance();
            let x = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            self.expect(Tok::Dot)?;
            let body = self.term()?;
            return Ok(Term::Abs(x, ty, Box::new(body)));
        }
        let mut t = self.head()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            t = Term::App(Box::new(t), Box::new(arg));
        }
        // A trailing abstraction is an argument too: `f \x:nat. x`.
        if *self.peek() == Tok::Backslash {
            let arg = self.term()?;
            t = Term::App(Box::new(t), Box::new(arg));
        }
        Ok(t)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_)
                | Tok::Zero
                | Tok::LParen
                | Tok::Keyword("true")
                | Tok::Keyword("false")
                | Tok::Keyword("nil")
        )
    }

    fn bracketed(&mut self) -> Result<Term, ParseError> {
        self.expect(Tok::LAngle)?;
        let t = self.term()?;
        self.expect(Tok::RAngle)?;
        Ok(t)
    }

    fn head(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Tok::Keyword("suc") => {
                self.advance();
                Ok(Term::Suc(Box::new(self.atom()?)))
            }
            Tok::Keyword("cons") => {
                self.advance();
                let h = self.atom()?;
                let tl = self.atom()?;
                Ok(Term::Cons(Box::new(h), Box::new(tl)))
            }
            Tok::Keyword("iterbool") => {
                self.advance();
                let on_true = self.bracketed()?;
                let on_false = self.bracketed()?;
                let scrutinee = self.atom()?;
                Ok(Term::iter_bool(on_true, on_false, scrutinee))
            }
            Tok::Keyword("iternat") => {
                self.advance();
                self.expect(Tok::LAngle)?;
                self.expect(Tok::Backslash)?;
                let binder = self.ident()?;
                self.expect(Tok::Dot)?;
                let step = self.term()?;
                self.expect(Tok::RAngle)?;
                let zero = self.bracketed()?;
                let scrutinee = self.atom()?;
                Ok(Term::iter_nat(&binder, step, zero, scrutinee))
            }
            Tok::Keyword("iterlist") => {
                self.advance();
                self.expect(Tok::LAngle)?;
                self.expect(Tok::Backslash)?;
                let head = self.ident()?;
                let at = self.pos;
                let acc = self.ident()?;
                if acc == head {
                    self.pos = at;
                    let mut err = self.error(&["identifier"]);
                    err.message = format!("iterlist binders must be distinct, `{acc}` repeated");
                    return Err(err);
                }
                self.expect(Tok::Dot)?;
                let step = self.term()?;
                self.expect(Tok::RAngle)?;
                let nil = self.bracketed()?;
                let scrutinee = self.atom()?;
                Ok(Term::iter_list(&head, &acc, step, nil, scrutinee))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.advance();
                Ok(Term::Var(x))
            }
            Tok::Zero => {
                self.advance();
                Ok(Term::Zero)
            }
            Tok::Keyword("true") => {
                self.advance();
                Ok(Term::True)
            }
            Tok::Keyword("false") => {
                self.advance();
                Ok(Term::False)
            }
            Tok::Keyword("nil") => {
                self.advance();
                Ok(Term::Nil)
            }
            Tok::LParen => {
                self.advance();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => Err(self.error(&["identifier", "`0`", "`true`", "`false`", "`nil`", "`(`"])),
        }
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let dom = self.ty_app()?;
        if *self.peek() == Tok::Arrow {
            self.advance();
            let cod = self.ty()?;
            Ok(Type::arrow(dom, cod))
        } else {
            Ok(dom)
        }
    }

    fn ty_app(&mut self) -> Result<Type, ParseError> {
        match self.peek() {
            Tok::Keyword("bool") => {
                self.advance();
                Ok(Type::Bool)
            }
            Tok::Keyword("nat") => {
                self.advance();
                Ok(Type::Nat)
            }
            Tok::Keyword("list") => {
                self.advance();
                Ok(Type::list(self.ty_app()?))
            }
            Tok::LParen => {
                self.advance();
                let ty = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(ty)
            }
            _ => Err(self.error(&["`bool`", "`nat`", "`list`", "`(`"])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_and_constructors() {
        assert_eq!(parse("0").unwrap(), Term::Zero);
        assert_eq!(
            parse("\\x:nat. suc x").unwrap(),
            Term::abs("x", Type::Nat, Term::suc(Term::var("x")))
        );
        assert_eq!(
            parse("iternat <\\x. suc x> <0> (suc 0)").unwrap(),
            Term::iter_nat("x", Term::suc(Term::var("x")), Term::Zero, Term::numeral(1))
        );
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse("f a b").unwrap();
        assert_eq!(
            t,
            Term::app(Term::app(Term::var("f"), Term::var("a")), Term::var("b"))
        );
    }

    #[test]
    fn arrows_are_right_associative() {
        assert_eq!(
            parse_type("nat -> nat -> bool").unwrap(),
            Type::arrow(Type::Nat, Type::arrow(Type::Nat, Type::Bool))
        );
        assert_eq!(
            parse_type("(nat -> nat) -> list nat").unwrap(),
            Type::arrow(Type::arrow(Type::Nat, Type::Nat), Type::list(Type::Nat))
        );
    }

    #[test]
    fn comments_and_unicode_lambda() {
        let t = parse("-- identity\nλx:bool. x -- trailing\n").unwrap();
        assert_eq!(t, Term::abs("x", Type::Bool, Term::var("x")));
    }

    #[test]
    fn iterlist_and_iterbool() {
        let t = parse("iterlist <\\x y. cons x y> <nil> (cons 0 nil)").unwrap();
        assert_eq!(
            t,
            Term::iter_list(
                "x",
                "y",
                Term::cons(Term::var("x"), Term::var("y")),
                Term::Nil,
                Term::list([Term::Zero])
            )
        );
        let b = parse("iterbool <0> <suc 0> false").unwrap();
        assert_eq!(
            b,
            Term::iter_bool(Term::Zero, Term::numeral(1), Term::False)
        );
    }

    #[test]
    fn errors_carry_position_and_expectations() {
        let err = parse("\\x nat. x").unwrap_err();
        assert_eq!((err.line, err.column), (1, 4));
        assert!(err.expected.contains("`:`"));

        let err = parse("suc\n  )").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert!(err.expected.contains("identifier"));

        let err = parse("iterlist <\\x x. x> <nil> nil").unwrap_err();
        assert!(err.message.contains("distinct"));
    }

    #[test]
    fn trailing_lambda_argument() {
        let t = parse("f \\x:nat. x").unwrap();
        assert_eq!(
            t,
            Term::app(Term::var("f"), Term::abs("x", Type::Nat, Term::var("x")))
        );
    }
}
