use std::collections::HashMap;

use super::ast::{BinOp, ChartAst, ChartGroup, Expr, Func, ParamDecl};
use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, ParseErrorKind, Pos};

const UNRESOLVED: usize = usize::MAX;

struct Parser {
    toks: Vec<Token>,
    at: usize,
    /// Variable references in matrix cells, checked once all params are known.
    refs: Vec<(String, Pos)>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::new(
            self.pos(),
            ParseErrorKind::Syntax {
                expected: expected.to_string(),
                found: self.peek().describe(),
            },
        )
    }

    fn is_punct(&self, c: char) -> bool {
        *self.peek() == Tok::Punct(c)
    }

    fn expect_punct(&mut self, c: char) -> PResult<Pos> {
        if self.is_punct(c) {
            Ok(self.bump().pos)
        } else {
            Err(self.error(&format!("`{c}`")))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Pos> {
        if self.is_keyword(kw) {
            Ok(self.bump().pos)
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Punct('+') => BinOp::Add,
                Tok::Punct('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Punct('*') => BinOp::Mul,
                Tok::Punct('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_punct('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.atom()?;
        if !self.is_punct('^') {
            return Ok(base);
        }
        self.bump();
        let negative = if self.is_punct('-') {
            self.bump();
            true
        } else {
            false
        };
        match *self.peek() {
            Tok::Int(v) if v <= i32::MAX as i64 => {
                self.bump();
                let exp = if negative { -(v as i32) } else { v as i32 };
                Ok(Expr::Pow {
                    base: Box::new(base),
                    exp,
                })
            }
            _ => Err(self.error("integer exponent")),
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Number(x) => {
                self.bump();
                Ok(Expr::Num(x))
            }
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Num(v as f64))
            }
            Tok::Punct('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let pos = self.bump().pos;
                if self.is_punct('(') {
                    let func = Func::from_name(&name).ok_or_else(|| {
                        ParseError::new(pos, ParseErrorKind::UnknownFunction(name.clone()))
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_punct(')')?;
                    return Ok(Expr::Call {
                        func,
                        arg: Box::new(arg),
                    });
                }
                if name == "pi" {
                    return Ok(Expr::Pi);
                }
                if Func::from_name(&name).is_some() {
                    return Err(self.error(&format!("`(` after `{name}`")));
                }
                self.refs.push((name.clone(), pos));
                Ok(Expr::Var {
                    name,
                    index: UNRESOLVED,
                })
            }
            _ => Err(self.error("expression")),
        }
    }

    /// A bound must be a constant expression; parameters are not in scope.
    fn bound(&mut self) -> PResult<Expr> {
        let before = self.refs.len();
        let e = self.expr()?;
        if self.refs.len() > before {
            let (name, pos) = self.refs[before].clone();
            return Err(ParseError::new(pos, ParseErrorKind::UnknownIdentifier(name)));
        }
        Ok(e)
    }

    fn params(&mut self) -> PResult<Vec<(ParamDecl, Pos)>> {
        let mut out: Vec<(ParamDecl, Pos)> = Vec::new();
        loop {
            let (name, pos) = self.ident()?;
            if name == "pi" || Func::from_name(&name).is_some() {
                return Err(ParseError::new(
                    pos,
                    ParseErrorKind::Syntax {
                        expected: "parameter name".into(),
                        found: format!("reserved name `{name}`"),
                    },
                ));
            }
            if out.iter().any(|(p, _)| p.name == name) {
                return Err(ParseError::new(pos, ParseErrorKind::DuplicateParameter(name)));
            }
            self.expect_keyword("in")?;
            self.expect_punct('[')?;
            let lower = self.bound()?;
            self.expect_punct(',')?;
            let upper = self.bound()?;
            self.expect_punct(']')?;
            let (lo, hi) = (lower.eval(&[]), upper.eval(&[]));
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(ParseError::new(
                    pos,
                    ParseErrorKind::BoundOrder {
                        param: name,
                        lower: lo,
                        upper: hi,
                    },
                ));
            }
            out.push((ParamDecl { name, lower, upper }, pos));
            if self.is_punct(',') {
                self.bump();
            } else {
                return Ok(out);
            }
        }
    }

    fn group_tag(&mut self) -> PResult<ChartGroup> {
        let (name, pos) = self.ident()?;
        let dim = if self.is_punct('(') {
            self.bump();
            let d = match *self.peek() {
                Tok::Int(v) => {
                    self.bump();
                    v
                }
                _ => return Err(self.error("group dimension")),
            };
            self.expect_punct(')')?;
            Some(d)
        } else {
            None
        };
        ChartGroup::from_parts(&name, dim).ok_or_else(|| {
            let shown = match dim {
                Some(d) => format!("{name}({d})"),
                None => name,
            };
            ParseError::new(pos, ParseErrorKind::UnknownGroup(shown))
        })
    }

    fn matrix(&mut self) -> PResult<(Vec<Vec<Expr>>, Pos)> {
        let start = self.expect_punct('[')?;
        let mut rows: Vec<Vec<Expr>> = Vec::new();
        loop {
            let row_pos = self.expect_punct('[')?;
            let mut row = vec![self.expr()?];
            while self.is_punct(',') {
                self.bump();
                row.push(self.expr()?);
            }
            self.expect_punct(']')?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(ParseError::new(
                        row_pos,
                        ParseErrorKind::RaggedMatrix {
                            row: rows.len() + 1,
                            expected: first.len(),
                            found: row.len(),
                        },
                    ));
                }
            }
            rows.push(row);
            if self.is_punct(',') {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_punct(']')?;
        if rows.len() != rows[0].len() {
            return Err(ParseError::new(
                start,
                ParseErrorKind::NotSquare {
                    rows: rows.len(),
                    cols: rows[0].len(),
                },
            ));
        }
        Ok((rows, start))
    }

    fn chart(&mut self) -> PResult<ChartAst> {
        let wrapped = self.is_keyword("chart");
        let name = if wrapped {
            self.bump();
            let (name, _) = self.ident()?;
            self.expect_punct('{')?;
            name
        } else {
            "anonymous".to_string()
        };
        let end = if wrapped { Tok::Punct('}') } else { Tok::Eof };

        let mut params = None;
        let mut group = None;
        let mut matrix = None;
        while *self.peek() != end {
            let (section, pos) = self.ident().map_err(|_| self.error("`params`, `group` or `matrix`"))?;
            self.expect_punct(':')?;
            let dup = || ParseError::new(pos, ParseErrorKind::DuplicateSection(section.clone()));
            match section.as_str() {
                "params" if params.is_none() => params = Some(self.params()?),
                "group" if group.is_none() => group = Some((self.group_tag()?, pos)),
                "matrix" if matrix.is_none() => matrix = Some(self.matrix()?),
                "params" | "group" | "matrix" => return Err(dup()),
                _ => {
                    return Err(ParseError::new(
                        pos,
                        ParseErrorKind::Syntax {
                            expected: "`params`, `group` or `matrix`".into(),
                            found: format!("`{section}`"),
                        },
                    ))
                }
            }
            if self.is_punct(';') {
                self.bump();
            } else if *self.peek() != end {
                return Err(self.error("`;`"));
            }
        }
        if wrapped {
            self.bump();
            if *self.peek() != Tok::Eof {
                return Err(self.error("end of input"));
            }
        }

        let end_pos = self.pos();
        let params = params.ok_or(ParseError::new(end_pos, ParseErrorKind::MissingSection("params")))?;
        let (mut matrix, _) =
            matrix.ok_or(ParseError::new(end_pos, ParseErrorKind::MissingSection("matrix")))?;

        let index: HashMap<&str, usize> = params
            .iter()
            .enumerate()
            .map(|(i, (p, _))| (p.name.as_str(), i))
            .collect();
        if let Some((name, pos)) = self.refs.iter().find(|(n, _)| !index.contains_key(n.as_str())) {
            return Err(ParseError::new(*pos, ParseErrorKind::UnknownIdentifier(name.clone())));
        }
        for cell in matrix.iter_mut().flatten() {
            resolve(cell, &index);
        }

        let group = match group {
            Some((g, pos)) => {
                if let Some((dim, d)) = g.shape() {
                    if matrix.len() != dim || params.len() != d {
                        return Err(ParseError::new(
                            pos,
                            ParseErrorKind::GroupShape {
                                group: g.to_string(),
                                detail: format!(
                                    "expected a {dim}×{dim} matrix in {d} parameters, got {0}×{0} in {1}",
                                    matrix.len(),
                                    params.len()
                                ),
                            },
                        ));
                    }
                }
                Some(g)
            }
            None => None,
        };
        Ok(ChartAst {
            name,
            params: params.into_iter().map(|(p, _)| p).collect(),
            group,
            matrix,
        })
    }
}

fn resolve(e: &mut Expr, index: &HashMap<&str, usize>) {
    match e {
        Expr::Var { name, index: slot } => *slot = index[name.as_str()],
        Expr::Neg(inner) => resolve(inner, index),
        Expr::Binary { lhs, rhs, .. } => {
            resolve(lhs, index);
            resolve(rhs, index);
        }
        Expr::Pow { base, .. } => resolve(base, index),
        Expr::Call { arg, .. } => resolve(arg, index),
        Expr::Num(_) | Expr::Pi => {}
    }
}

/// Parses a chart definition and enforces its static invariants.
pub fn parse_chart(source: &str) -> Result<ChartAst, ParseError> {
    let mut p = Parser {
        toks: tokenize(source)?,
        at: 0,
        refs: Vec::new(),
    };
    p.chart()
}

/// Parses a single expression over the named variables.
pub fn parse_expr(source: &str, vars: &[&str]) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: tokenize(source)?,
        at: 0,
        refs: Vec::new(),
    };
    let mut e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("end of expression"));
    }
    let index: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    if let Some((name, pos)) = p.refs.iter().find(|(n, _)| !index.contains_key(n.as_str())) {
        return Err(ParseError::new(*pos, ParseErrorKind::UnknownIdentifier(name.clone())));
    }
    resolve(&mut e, &index);
    Ok(e)
}
