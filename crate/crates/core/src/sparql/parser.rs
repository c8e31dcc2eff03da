//! Recursive-descent parser for the SPARQL subset.

use super::lexer::{lex, Keyword, Tok, Token};
use super::{FilterExpr, QueryForm, SparqlError, SparqlQuery, Term, TermKind, TriplePattern};

pub fn parse(text: &str) -> Result<SparqlQuery, SparqlError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, at: 0 };
    let query = p.query(text)?;
    Ok(query)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn pos(&self) -> usize {
        self.peek().map(|t| t.pos).unwrap_or_else(|| {
            self.tokens.last().map(|t| t.pos + 1).unwrap_or(0)
        })
    }

    fn err(&self, reason: impl Into<String>) -> SparqlError {
        SparqlError::Parse {
            pos: self.pos(),
            reason: reason.into(),
        }
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), SparqlError> {
        match self.next() {
            Some(t) if t.tok == *want => Ok(()),
            Some(t) => Err(SparqlError::Parse {
                pos: t.pos,
                reason: format!("expected {what}"),
            }),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    fn query(&mut self, raw: &str) -> Result<SparqlQuery, SparqlError> {
        let head = self.next().ok_or_else(|| self.err("empty query"))?;
        let (form, projection) = match head.tok {
            Tok::Keyword(Keyword::Select) => self.select_head()?,
            Tok::Keyword(Keyword::Ask) => (QueryForm::Ask, Vec::new()),
            Tok::Unsupported(kw) => {
                return Err(SparqlError::Unsupported {
                    construct: kw,
                    pos: head.pos,
                })
            }
            _ => {
                return Err(SparqlError::Parse {
                    pos: head.pos,
                    reason: "query must start with SELECT or ASK".into(),
                })
            }
        };

        // WHERE is required for SELECT, optional for ASK.
        match (&form, self.peek().map(|t| t.tok.clone())) {
            (QueryForm::Ask, Some(Tok::Keyword(Keyword::Where))) => {
                self.next();
            }
            (QueryForm::Ask, _) => {}
            (_, Some(Tok::Keyword(Keyword::Where))) => {
                self.next();
            }
            _ => return Err(self.err("expected WHERE")),
        }

        let (patterns, filters) = self.group()?;
        if let Some(t) = self.peek() {
            return match &t.tok {
                Tok::Unsupported(kw) => Err(SparqlError::Unsupported {
                    construct: kw.clone(),
                    pos: t.pos,
                }),
                _ => Err(self.err("trailing input after query")),
            };
        }
        if patterns.is_empty() {
            return Err(SparqlError::EmptyGraphPattern);
        }

        let query = SparqlQuery {
            form,
            projection,
            patterns,
            filters,
            raw: raw.to_string(),
        };
        check_bound(&query)?;
        Ok(query)
    }

    /// Parses what follows SELECT: a variable list or a COUNT clause.
    fn select_head(&mut self) -> Result<(QueryForm, Vec<String>), SparqlError> {
        if let Some(Tok::Keyword(Keyword::Distinct)) = self.peek().map(|t| &t.tok) {
            self.next(); // answers are sets; DISTINCT is a no-op here
        }
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::LParen) => {
                self.next();
                self.expect(&Tok::Keyword(Keyword::Count), "COUNT")?;
                self.expect(&Tok::LParen, "'(' after COUNT")?;
                let distinct = if let Some(Tok::Keyword(Keyword::Distinct)) =
                    self.peek().map(|t| &t.tok)
                {
                    self.next();
                    true
                } else {
                    false
                };
                let counted = self.variable("counted variable")?;
                self.expect(&Tok::RParen, "')' after counted variable")?;
                self.expect(&Tok::Keyword(Keyword::As), "AS")?;
                let alias = self.variable("alias variable")?;
                self.expect(&Tok::RParen, "')' after alias")?;
                Ok((QueryForm::CountSelect { counted, distinct }, vec![alias]))
            }
            Some(Tok::Var(_)) => {
                let mut vars = Vec::new();
                while let Some(Tok::Var(v)) = self.peek().map(|t| t.tok.clone()) {
                    vars.push(v);
                    self.next();
                }
                Ok((QueryForm::Select, vars))
            }
            _ => Err(self.err("expected projection variables or a COUNT clause")),
        }
    }

    fn variable(&mut self, what: &str) -> Result<String, SparqlError> {
        match self.next() {
            Some(Token {
                tok: Tok::Var(v), ..
            }) => Ok(v),
            Some(t) => Err(SparqlError::Parse {
                pos: t.pos,
                reason: format!("expected {what}"),
            }),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    fn group(&mut self) -> Result<(Vec<TriplePattern>, Vec<FilterExpr>), SparqlError> {
        self.expect(&Tok::LBrace, "'{'")?;
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        loop {
            let t = self
                .peek()
                .cloned()
                .ok_or_else(|| self.err("unterminated graph pattern"))?;
            match t.tok {
                Tok::RBrace => {
                    self.next();
                    break;
                }
                Tok::Keyword(Keyword::Filter) => {
                    self.next();
                    filters.push(self.filter()?);
                    self.eat_dot();
                }
                Tok::Unsupported(kw) => {
                    return Err(SparqlError::Unsupported {
                        construct: kw,
                        pos: t.pos,
                    })
                }
                Tok::Var(_) | Tok::Iri(_) => {
                    patterns.push(self.triple()?);
                    self.eat_dot();
                }
                _ => {
                    return Err(SparqlError::Parse {
                        pos: t.pos,
                        reason: "expected a triple pattern, FILTER, or '}'".into(),
                    })
                }
            }
        }
        Ok((patterns, filters))
    }

    fn eat_dot(&mut self) {
        if let Some(Tok::Dot) = self.peek().map(|t| &t.tok) {
            self.next();
        }
    }

    fn triple(&mut self) -> Result<TriplePattern, SparqlError> {
        let subject = self.term("subject")?;
        if !matches!(subject.kind, TermKind::Variable | TermKind::IriOrName) {
            return Err(self.err("subject must be a variable or an angle-bracketed name"));
        }
        let predicate = self.term("predicate")?;
        if !matches!(predicate.kind, TermKind::Variable | TermKind::IriOrName) {
            return Err(self.err("predicate must be a variable or an angle-bracketed name"));
        }
        if let Some(Token {
            tok: Tok::PathOp(c),
            pos,
        }) = self.peek().cloned()
        {
            return Err(SparqlError::Unsupported {
                construct: format!("property path ({c})"),
                pos,
            });
        }
        let object = self.term("object")?;
        Ok(TriplePattern {
            subject,
            predicate,
            object,
        })
    }

    fn filter(&mut self) -> Result<FilterExpr, SparqlError> {
        self.expect(&Tok::LParen, "'(' after FILTER")?;
        let lhs = self.term("filter operand")?;
        let op = match self.next() {
            Some(Token {
                tok: Tok::Cmp(op), ..
            }) => op,
            Some(t) => {
                return Err(SparqlError::Parse {
                    pos: t.pos,
                    reason: "expected comparison operator".into(),
                })
            }
            None => return Err(self.err("expected comparison operator")),
        };
        let rhs = self.term("filter operand")?;
        self.expect(&Tok::RParen, "')' after filter")?;
        if lhs.kind != TermKind::Variable && rhs.kind != TermKind::Variable {
            return Err(self.err("filter must reference at least one variable"));
        }
        Ok(FilterExpr { op, lhs, rhs })
    }

    fn term(&mut self, what: &str) -> Result<Term, SparqlError> {
        match self.next() {
            Some(Token { tok, pos }) => match tok {
                Tok::Var(v) => Ok(Term {
                    kind: TermKind::Variable,
                    lexical: v,
                }),
                Tok::Iri(name) => Ok(Term {
                    kind: TermKind::IriOrName,
                    lexical: name,
                }),
                Tok::Str(s) => Ok(Term {
                    kind: if is_date_shape(&s) {
                        TermKind::DateLiteral
                    } else {
                        TermKind::StringLiteral
                    },
                    lexical: s,
                }),
                Tok::Num(n) => Ok(Term {
                    kind: TermKind::NumericLiteral,
                    lexical: n,
                }),
                Tok::Unsupported(kw) => Err(SparqlError::Unsupported { construct: kw, pos }),
                _ => Err(SparqlError::Parse {
                    pos,
                    reason: format!("expected {what}"),
                }),
            },
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }
}

/// ISO-8601 calendar date: exactly `YYYY-MM-DD`.
pub fn is_date_shape(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| matches!(i, 4 | 7) || c.is_ascii_digit())
}

fn check_bound(query: &SparqlQuery) -> Result<(), SparqlError> {
    let mut bound: Vec<&str> = Vec::new();
    for p in &query.patterns {
        for t in [&p.subject, &p.predicate, &p.object] {
            if t.kind == TermKind::Variable {
                bound.push(&t.lexical);
            }
        }
    }
    for f in &query.filters {
        for t in [&f.lhs, &f.rhs] {
            if t.kind == TermKind::Variable {
                bound.push(&t.lexical);
            }
        }
    }
    let check = |v: &str| -> Result<(), SparqlError> {
        if bound.iter().any(|b| *b == v) {
            Ok(())
        } else {
            Err(SparqlError::UnboundProjection(v.to_string()))
        }
    };
    match &query.form {
        QueryForm::Select => {
            if query.projection.is_empty() {
                return Err(SparqlError::Parse {
                    pos: 0,
                    reason: "SELECT requires at least one projection variable".into(),
                });
            }
            for v in &query.projection {
                check(v)?;
            }
        }
        QueryForm::CountSelect { counted, .. } => check(counted)?,
        QueryForm::Ask => {}
    }
    Ok(())
}
