//! Recursive-descent parser for the expression grammar.

use thiserror::Error;

use super::{Node, ScalarExpr};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    EmptyInput,
    UnexpectedChar(char),
    ExpectedExpression,
    ExpectedClosingParen,
    ExpectedOpeningParen(String),
    UnknownIdentifier(String),
    VarOutOfRange { index: usize, arity: usize },
    ExponentNotInteger,
    BadNumber(String),
    TrailingInput,
}

/// Syntax/validation error with the byte offset it occurred at.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at offset {offset}: {}", kind_message(.kind))]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

fn kind_message(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::EmptyInput => "empty expression".into(),
        ParseErrorKind::UnexpectedChar(c) => format!("unexpected character `{c}`"),
        ParseErrorKind::ExpectedExpression => "expected an expression".into(),
        ParseErrorKind::ExpectedClosingParen => "expected `)`".into(),
        ParseErrorKind::ExpectedOpeningParen(f) => format!("expected `(` after `{f}`"),
        ParseErrorKind::UnknownIdentifier(name) => format!("unknown identifier `{name}`"),
        ParseErrorKind::VarOutOfRange { index, arity } => {
            format!("variable x{index} out of range for arity {arity}")
        }
        ParseErrorKind::ExponentNotInteger => "exponent must be a constant integer".into(),
        ParseErrorKind::BadNumber(s) => format!("malformed number `{s}`"),
        ParseErrorKind::TrailingInput => "unexpected trailing input".into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the next token with its starting byte offset, or None at EOF.
    fn next(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos] as char;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0'..='9' | '.' => {
                let mut end = self.pos;
                let mut seen_exp = false;
                while end < self.src.len() {
                    let b = self.src[end] as char;
                    let take = b.is_ascii_digit()
                        || b == '.'
                        || b == 'e'
                        || b == 'E'
                        || ((b == '+' || b == '-')
                            && seen_exp
                            && matches!(self.src[end - 1] as char, 'e' | 'E'));
                    if b == 'e' || b == 'E' {
                        seen_exp = true;
                    }
                    if !take {
                        break;
                    }
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[start..end]).unwrap();
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::BadNumber(text.to_string()),
                })?;
                self.pos = end;
                return Ok(Some((start, Tok::Num(value))));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = self.pos;
                while end < self.src.len() {
                    let b = self.src[end] as char;
                    if b.is_ascii_alphanumeric() || b == '_' {
                        end += 1;
                    } else {
                        break;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..end]).unwrap().to_string();
                self.pos = end;
                return Ok(Some((start, Tok::Ident(text))));
            }
            other => {
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::UnexpectedChar(other),
                })
            }
        };
        self.pos += 1;
        Ok(Some((start, tok)))
    }
}

type UnaryCtor<T> = fn(Box<Node<T>>) -> Node<T>;

struct Parser<T> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end_offset: usize,
    arity: usize,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Real> Parser<T> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.idx)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map(|(o, _)| *o).unwrap_or(self.end_offset)
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Node<T>, ParseError> {
        let mut lhs = self.term()?;
        while let Some((_, tok)) = self.peek() {
            let op = match tok {
                Tok::Plus => true,
                Tok::Minus => false,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = if op {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Node<T>, ParseError> {
        let mut lhs = self.unary()?;
        while let Some((_, tok)) = self.peek() {
            let mul = match tok {
                Tok::Star => true,
                Tok::Slash => false,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = if mul {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Node<T>, ParseError> {
        if let Some((_, Tok::Minus)) = self.peek() {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    // power := atom ('^' int)*
    fn power(&mut self) -> Result<Node<T>, ParseError> {
        let mut base = self.atom()?;
        while let Some((_, Tok::Caret)) = self.peek() {
            self.bump();
            let n = self.int_exponent()?;
            base = Node::Pow(Box::new(base), n);
        }
        Ok(base)
    }

    fn int_exponent(&mut self) -> Result<i32, ParseError> {
        let offset = self.here();
        let negative = if let Some((_, Tok::Minus)) = self.peek() {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Some((_, Tok::Num(v))) => {
                if v.fract() != 0.0 || v.abs() > i32::MAX as f64 {
                    return Err(ParseError {
                        offset,
                        kind: ParseErrorKind::ExponentNotInteger,
                    });
                }
                let n = v as i32;
                Ok(if negative { -n } else { n })
            }
            _ => Err(ParseError {
                offset,
                kind: ParseErrorKind::ExponentNotInteger,
            }),
        }
    }

    // atom := number | ident '(' expr ')' | x<k> | '(' expr ')'
    fn atom(&mut self) -> Result<Node<T>, ParseError> {
        match self.bump() {
            Some((_, Tok::Num(v))) => Ok(Node::Const(T::from_f64(v).unwrap())),
            Some((_, Tok::LParen)) => {
                let inner = self.expr()?;
                let offset = self.here();
                match self.bump() {
                    Some((_, Tok::RParen)) => Ok(inner),
                    _ => Err(ParseError {
                        offset,
                        kind: ParseErrorKind::ExpectedClosingParen,
                    }),
                }
            }
            Some((offset, Tok::Ident(name))) => self.ident(offset, name),
            Some((offset, _)) => Err(ParseError {
                offset,
                kind: ParseErrorKind::ExpectedExpression,
            }),
            None => Err(ParseError {
                offset: self.end_offset,
                kind: ParseErrorKind::ExpectedExpression,
            }),
        }
    }

    fn ident(&mut self, offset: usize, name: String) -> Result<Node<T>, ParseError> {
        let func: Option<UnaryCtor<T>> = match name.as_str() {
            "exp" => Some(Node::Exp),
            "log" => Some(Node::Log),
            "sin" => Some(Node::Sin),
            "cos" => Some(Node::Cos),
            "sqrt" => Some(Node::Sqrt),
            _ => None,
        };
        if let Some(ctor) = func {
            let paren_at = self.here();
            match self.bump() {
                Some((_, Tok::LParen)) => {}
                _ => {
                    return Err(ParseError {
                        offset: paren_at,
                        kind: ParseErrorKind::ExpectedOpeningParen(name),
                    })
                }
            }
            let arg = self.expr()?;
            let close_at = self.here();
            match self.bump() {
                Some((_, Tok::RParen)) => Ok(ctor(Box::new(arg))),
                _ => Err(ParseError {
                    offset: close_at,
                    kind: ParseErrorKind::ExpectedClosingParen,
                }),
            }
        } else if let Some(index) = parse_var_name(&name) {
            if index >= self.arity {
                return Err(ParseError {
                    offset,
                    kind: ParseErrorKind::VarOutOfRange {
                        index,
                        arity: self.arity,
                    },
                });
            }
            Ok(Node::Var(index))
        } else {
            Err(ParseError {
                offset,
                kind: ParseErrorKind::UnknownIdentifier(name),
            })
        }
    }
}

fn parse_var_name(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('x')?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

pub(super) fn parse<T: Real>(text: &str, arity: usize) -> Result<ScalarExpr<T>, ParseError> {
    assert!(arity >= 1, "arity must be at least 1");
    if text.trim().is_empty() {
        return Err(ParseError {
            offset: 0,
            kind: ParseErrorKind::EmptyInput,
        });
    }
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let mut parser = Parser::<T> {
        toks,
        idx: 0,
        end_offset: text.len(),
        arity,
        _marker: std::marker::PhantomData,
    };
    let root = parser.expr()?;
    if let Some((offset, _)) = parser.peek() {
        return Err(ParseError {
            offset: *offset,
            kind: ParseErrorKind::TrailingInput,
        });
    }
    Ok(ScalarExpr { arity, root })
}
