//! Recursive-descent parser for the expression grammar.
//!
//! Grammar, loosest to tightest binding:
//!
//! ```text
//! expr   := term  (('+' | '-') term)*          left-associative
//! term   := unary (('*' | '/') unary)*         left-associative
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?                  right-associative
//! atom   := NUMBER | IDENT '(' expr (',' expr)* ')' | VARIABLE | '(' expr ')'
//! ```
//!
//! Numbers are decimal literals with optional fraction and exponent. The one
//! free variable is named by the caller; every other identifier must be a
//! builtin function called with its exact arity.

use super::{BinaryOp, Builtin, Node};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position} (the variable here is `{variable}`)")]
    UnknownIdentifier {
        position: usize,
        name: String,
        variable: String,
    },
    #[error("`{name}` takes {expected} argument(s) but got {found} at position {position}")]
    WrongArity {
        position: usize,
        name: String,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    fn syntax(position: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(source: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                tokens.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                tokens.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                tokens.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                tokens.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                tokens.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                tokens.push((Tok::RParen, i));
                i += 1;
            }
            ',' => {
                tokens.push((Tok::Comma, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| {
                    ParseError::syntax(start, format!("invalid numeric literal `{text}`"))
                })?;
                if !value.is_finite() {
                    return Err(ParseError::syntax(
                        start,
                        format!("numeric literal `{text}` overflows"),
                    ));
                }
                tokens.push((Tok::Number(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push((Tok::Ident(source[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError::syntax(i, format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    variable: &'a str,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|&(_, p)| p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let tok = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError::syntax(self.here(), format!("expected {what}")))
        }
    }

    fn parse_expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinaryOp::Add,
                Some(Tok::Minus) => BinaryOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinaryOp::Mul,
                Some(Tok::Slash) => BinaryOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Node, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let inner = self.parse_unary()?;
            Ok(Node::Neg(Box::new(inner)))
        } else {
            self.parse_power()
        }
    }

    fn parse_power(&mut self) -> Result<Node, ParseError> {
        let base = self.parse_atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            // The exponent re-enters at unary level, making `^` right-
            // associative and letting `x^-2` parse without parentheses.
            let exponent = self.parse_unary()?;
            Ok(Node::Binary(
                BinaryOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ))
        } else {
            Ok(base)
        }
    }

    fn parse_atom(&mut self) -> Result<Node, ParseError> {
        let position = self.here();
        match self.bump() {
            Some(Tok::Number(value)) => Ok(Node::Number(value)),
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let mut args = vec![self.parse_expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.parse_expr()?);
                    }
                    self.expect(Tok::RParen, "`)` to close the argument list")?;
                    let builtin = Builtin::from_name(&name).ok_or_else(|| {
                        ParseError::UnknownIdentifier {
                            position,
                            name: name.clone(),
                            variable: self.variable.to_string(),
                        }
                    })?;
                    if args.len() != builtin.arity() {
                        return Err(ParseError::WrongArity {
                            position,
                            name,
                            expected: builtin.arity(),
                            found: args.len(),
                        });
                    }
                    Ok(Node::Call(builtin, args))
                } else if name == self.variable {
                    Ok(Node::Variable)
                } else {
                    Err(ParseError::UnknownIdentifier {
                        position,
                        name,
                        variable: self.variable.to_string(),
                    })
                }
            }
            Some(Tok::LParen) => {
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(other) => Err(ParseError::syntax(
                position,
                format!("expected a value, found `{}`", token_text(&other)),
            )),
            None => Err(ParseError::syntax(position, "unexpected end of input")),
        }
    }
}

fn token_text(tok: &Tok) -> String {
    match tok {
        Tok::Number(v) => format!("{v}"),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
        Tok::Slash => "/".into(),
        Tok::Caret => "^".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
        Tok::Comma => ",".into(),
    }
}

pub(crate) fn parse(source: &str, variable: &str) -> Result<Node, ParseError> {
    let tokens = lex(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        variable,
        end: source.len(),
    };
    let node = parser.parse_expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(ParseError::syntax(parser.here(), "unexpected trailing input"));
    }
    Ok(node)
}
