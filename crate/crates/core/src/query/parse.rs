//! Recursive-descent parser for the query grammar:
//!
//! ```text
//! query   := [ "P(" ] prop [ "given" prop ] [ ")" ]
//! prop    := conj { "|" conj }
//! conj    := unary { "&" unary }
//! unary   := "!" unary | "(" prop ")" | literal
//! literal := IDENT | IDENT "=" IDENT | IDENT "!=" IDENT
//! ```
//!
//! `!` written directly in front of a literal flips its polarity; in front of
//! anything else it produces a `Not` node. Literals on two-valued variables are
//! always stored positively (`!x` becomes `x = f`).

use crate::error::QueryError;
use crate::model::KnowledgeBase;

use super::{Literal, Proposition, QueryExpr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Bang,
    Eq,
    NotEq,
    Amp,
    Pipe,
    LParen,
    RParen,
    End,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '-')
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, QueryError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let tok = match c {
            '!' => {
                chars.next();
                if matches!(chars.peek(), Some((_, '='))) {
                    chars.next();
                    Tok::NotEq
                } else {
                    Tok::Bang
                }
            }
            '=' => {
                chars.next();
                Tok::Eq
            }
            '&' => {
                chars.next();
                Tok::Amp
            }
            '|' => {
                chars.next();
                Tok::Pipe
            }
            '(' => {
                chars.next();
                Tok::LParen
            }
            ')' => {
                chars.next();
                Tok::RParen
            }
            c if is_ident_char(c) => {
                let mut ident = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    ident.push(c);
                    chars.next();
                }
                Tok::Ident(ident)
            }
            other => {
                return Err(QueryError::Syntax {
                    pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, pos));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    kb: &'a KnowledgeBase,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError::Syntax {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn at_given(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "given")
    }

    fn query(&mut self) -> Result<QueryExpr, QueryError> {
        let wrapped = matches!(self.peek(), Tok::Ident(s) if s == "P")
            && *self.peek_at(1) == Tok::LParen;
        if wrapped {
            self.bump();
            self.bump();
        }
        let target = self.prop()?;
        let evidence = if self.at_given() {
            self.bump();
            Some(self.prop()?)
        } else {
            None
        };
        if wrapped {
            if *self.peek() != Tok::RParen {
                return self.syntax("expected `)` closing `P(`");
            }
            self.bump();
        }
        if *self.peek() != Tok::End {
            return self.syntax("unexpected trailing input");
        }
        Ok(QueryExpr { target, evidence })
    }

    fn prop(&mut self) -> Result<Proposition, QueryError> {
        let mut items = vec![self.conj()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            items.push(self.conj()?);
        }
        Ok(Proposition::or(items))
    }

    fn conj(&mut self) -> Result<Proposition, QueryError> {
        let mut items = vec![self.unary()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(Proposition::and(items))
    }

    fn unary(&mut self) -> Result<Proposition, QueryError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                if matches!(self.peek(), Tok::Ident(s) if s != "given") {
                    let lit = self.literal()?;
                    Ok(Proposition::Lit(lit.negated().canonical(self.kb)))
                } else {
                    Ok(Proposition::not(self.unary()?))
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.prop()?;
                if *self.peek() != Tok::RParen {
                    return self.syntax("expected `)`");
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(s) if s != "given" => Ok(Proposition::Lit(self.literal()?)),
            Tok::End => self.syntax("unexpected end of query"),
            other => self.syntax(format!("expected a literal, `!` or `(`, found {}", describe(&other))),
        }
    }

    fn literal(&mut self) -> Result<Literal, QueryError> {
        let pos = self.pos();
        let Tok::Ident(name) = self.bump() else {
            unreachable!("literal() is only entered on an identifier");
        };
        let var = self
            .kb
            .variable_by_name(&name)
            .ok_or_else(|| QueryError::UnknownVariable {
                name: name.clone(),
                pos,
            })?;
        let negative = match self.peek() {
            Tok::Eq => false,
            Tok::NotEq => true,
            _ => {
                if !var.is_boolean() {
                    return Err(QueryError::NotBinary { name, pos });
                }
                return Ok(Literal::positive(var.id, 0));
            }
        };
        self.bump();
        let value_pos = self.pos();
        let Tok::Ident(value) = self.bump() else {
            return Err(QueryError::Syntax {
                pos: value_pos,
                message: format!("expected a value name for `{name}`"),
            });
        };
        let index = var
            .value_index(&value)
            .ok_or_else(|| QueryError::UnknownValue {
                variable: name.clone(),
                value: value.clone(),
                pos: value_pos,
            })?;
        let lit = if negative {
            Literal::negative(var.id, index)
        } else {
            Literal::positive(var.id, index)
        };
        Ok(lit.canonical(self.kb))
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Bang => "`!`".into(),
        Tok::Eq => "`=`".into(),
        Tok::NotEq => "`!=`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Pipe => "`|`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses a query, resolving names against `kb`.
pub fn parse(text: &str, kb: &KnowledgeBase) -> Result<QueryExpr, QueryError> {
    let toks = lex(text)?;
    Parser { toks, at: 0, kb }.query()
}
