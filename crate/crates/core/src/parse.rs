//! Recursive-descent parser for the expression grammar.
//!
//! Grammar sketch:
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | postfix
//! postfix  := atom ('^' exponent)*
//! exponent := ['-'] INT | '(' ['-'] INT ')'
//! atom     := INT | '(' expr ')' | 'sin' '(' expr ')' | 'cos' '(' expr ')'
//!           | 'Dxi' '[' expr ']' | IDENT
//! ```
//! Identifiers are field names with optional derivative subscripts
//! (`u_xxt`), independent variables, or model parameters. Subscript
//! characters each name an independent variable.

use crate::expr::Expr;
use crate::system::SymbolTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    SyntaxError(String),
    UnknownSymbol(String),
    BadSubscript(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind_text} at line {line}, column {col}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
    kind_text: String,
}

impl ParseError {
    fn new(kind: ParseErrorKind, line: usize, col: usize) -> Self {
        let kind_text = match &kind {
            ParseErrorKind::SyntaxError(m) => format!("syntax error: {m}"),
            ParseErrorKind::UnknownSymbol(s) => format!("unknown symbol `{s}`"),
            ParseErrorKind::BadSubscript(s) => format!("bad derivative subscript `{s}`"),
        };
        ParseError {
            kind,
            line,
            col,
            kind_text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let start_col = col;
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | '[' | ']' => {
                chars.next();
                col += 1;
                out.push(Spanned {
                    tok: match c {
                        '+' => Tok::Plus,
                        '-' => Tok::Minus,
                        '*' => Tok::Star,
                        '/' => Tok::Slash,
                        '^' => Tok::Caret,
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '[' => Tok::LBracket,
                        _ => Tok::RBracket,
                    },
                    line,
                    col: start_col,
                });
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let value: i64 = s.parse().map_err(|_| {
                    ParseError::new(
                        ParseErrorKind::SyntaxError(format!("integer literal `{s}` out of range")),
                        line,
                        start_col,
                    )
                })?;
                out.push(Spanned {
                    tok: Tok::Int(value),
                    line,
                    col: start_col,
                });
            }
            c if c.is_ascii_alphabetic() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Ident(s),
                    line,
                    col: start_col,
                });
            }
            other => {
                return Err(ParseError::new(
                    ParseErrorKind::SyntaxError(format!("unexpected character `{other}`")),
                    line,
                    start_col,
                ));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    table: &'a SymbolTable,
    end_line: usize,
    end_col: usize,
}

/// Parses an expression against the given symbol table and canonicalizes.
pub fn parse_expr(text: &str, table: &SymbolTable) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let (end_line, end_col) = toks
        .last()
        .map(|s| (s.line, s.col + 1))
        .unwrap_or((1, 1));
    let mut p = Parser {
        toks,
        pos: 0,
        table,
        end_line,
        end_col,
    };
    let e = p.expr()?;
    if let Some(s) = p.peek_spanned() {
        return Err(ParseError::new(
            ParseErrorKind::SyntaxError("trailing input".into()),
            s.line,
            s.col,
        ));
    }
    Ok(e.canonical())
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_spanned(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn bump(&mut self) -> Option<Spanned> {
        let s = self.toks.get(self.pos).cloned();
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        let (line, col) = self.here();
        match self.bump() {
            Some(s) if s.tok == tok => Ok(()),
            _ => Err(ParseError::new(
                ParseErrorKind::SyntaxError(format!("expected {what}")),
                line,
                col,
            )),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = acc * Expr::Pow(Box::new(rhs), -1);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.atom()?;
        while matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let exp = self.exponent()?;
            acc = Expr::Pow(Box::new(acc), exp);
        }
        Ok(acc)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let (line, col) = self.here();
        let parenthesized = matches!(self.peek(), Some(Tok::LParen));
        if parenthesized {
            self.bump();
        }
        let negative = matches!(self.peek(), Some(Tok::Minus));
        if negative {
            self.bump();
        }
        let value = match self.bump() {
            Some(Spanned {
                tok: Tok::Int(n), ..
            }) => n,
            _ => {
                return Err(ParseError::new(
                    ParseErrorKind::SyntaxError("expected integer exponent".into()),
                    line,
                    col,
                ));
            }
        };
        if parenthesized {
            self.expect(Tok::RParen, "`)` after exponent")?;
        }
        let signed = if negative { -value } else { value };
        i32::try_from(signed).map_err(|_| {
            ParseError::new(
                ParseErrorKind::SyntaxError("exponent out of range".into()),
                line,
                col,
            )
        })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (line, col) = self.here();
        match self.bump() {
            Some(Spanned {
                tok: Tok::Int(n), ..
            }) => Ok(Expr::int(n)),
            Some(Spanned {
                tok: Tok::LParen, ..
            }) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Spanned {
                tok: Tok::Ident(name),
                line,
                col,
            }) => self.resolve_ident(&name, line, col),
            _ => Err(ParseError::new(
                ParseErrorKind::SyntaxError("expected expression".into()),
                line,
                col,
            )),
        }
    }

    fn resolve_ident(&mut self, name: &str, line: usize, col: usize) -> Result<Expr, ParseError> {
        if name == "sin" || name == "cos" {
            self.expect(Tok::LParen, "`(` after function name")?;
            let arg = self.expr()?;
            self.expect(Tok::RParen, "`)` after function argument")?;
            return Ok(if name == "sin" { arg.sin() } else { arg.cos() });
        }
        if name == "Dxi" {
            self.expect(Tok::LBracket, "`[` after Dxi")?;
            let arg = self.expr()?;
            self.expect(Tok::RBracket, "`]` after Dxi argument")?;
            let Some(dir) = self.table.antid_direction else {
                return Err(ParseError::new(
                    ParseErrorKind::SyntaxError(
                        "model has no designated antiderivative direction".into(),
                    ),
                    line,
                    col,
                ));
            };
            return Ok(arg.antid(dir));
        }
        if let Some((base, subs)) = name.split_once('_') {
            let Some(field) = self.table.field_index(base) else {
                return Err(ParseError::new(
                    ParseErrorKind::UnknownSymbol(base.to_string()),
                    line,
                    col,
                ));
            };
            let mut vars = Vec::with_capacity(subs.len());
            for ch in subs.chars() {
                match self.table.indep_index(&ch.to_string()) {
                    Some(v) => vars.push(v),
                    None => {
                        return Err(ParseError::new(
                            ParseErrorKind::BadSubscript(ch.to_string()),
                            line,
                            col,
                        ));
                    }
                }
            }
            if vars.is_empty() {
                return Err(ParseError::new(
                    ParseErrorKind::BadSubscript(String::new()),
                    line,
                    col,
                ));
            }
            return Ok(Expr::field(field, &vars));
        }
        if let Some(field) = self.table.field_index(name) {
            return Ok(Expr::field(field, &[]));
        }
        if let Some(v) = self.table.indep_index(name) {
            return Ok(Expr::indep(v));
        }
        if let Some(value) = self.table.params.get(name) {
            return Ok(Expr::Const(value.clone()));
        }
        Err(ParseError::new(
            ParseErrorKind::UnknownSymbol(name.to_string()),
            line,
            col,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{canon_eq, rat};

    fn table() -> SymbolTable {
        SymbolTable {
            indep: vec!["t".into(), "x".into()],
            fields: vec!["u".into()],
            params: Default::default(),
            antid_direction: Some(1),
        }
    }

    #[test]
    fn kdv_left_side() {
        let e = parse_expr("u_t + u*u_x + u_xxx", &table()).unwrap();
        let want = Expr::field(0, &[0])
            + Expr::field(0, &[]) * Expr::field(0, &[1])
            + Expr::field(0, &[1, 1, 1]);
        assert!(canon_eq(&e, &want));
    }

    #[test]
    fn trig_and_antiderivative() {
        let e = parse_expr("sin(u)", &table()).unwrap();
        assert!(canon_eq(&e, &Expr::field(0, &[]).sin()));
        let e = parse_expr("Dxi[ u*u_x ]", &table()).unwrap();
        let want = (Expr::field(0, &[]) * Expr::field(0, &[1])).antid(1);
        assert!(canon_eq(&e, &want));
    }

    #[test]
    fn rationals_and_powers() {
        let e = parse_expr("(1/2)*u^2", &table()).unwrap();
        assert!(canon_eq(&e, &Expr::field(0, &[]).pow(2).scale(rat(1, 2))));
        let e = parse_expr("u_x^-1", &table()).unwrap();
        assert!(canon_eq(&e, &Expr::field(0, &[1]).pow(-1)));
        let e = parse_expr("3/5", &table()).unwrap();
        assert!(canon_eq(&e, &Expr::ratio(3, 5)));
    }

    #[test]
    fn error_positions() {
        let err = parse_expr("u_t +\n* u", &table()).unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.col, 1);
        let err = parse_expr("u + v", &table()).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnknownSymbol(ref s) if s == "v"));
        assert_eq!(err.col, 5);
        let err = parse_expr("u_q", &table()).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::BadSubscript(_)));
    }

    #[test]
    fn roundtrip_through_printer() {
        let tbl = table();
        for src in [
            "(1/2)*u^2",
            "u_txx",
            "2*u - u_x",
            "sin(u)",
            "Dxi[u*u_x]",
            "u_x^-2",
            "(1 + u)^-1",
            "t*u_t + x*u_x",
        ] {
            let parsed = parse_expr(src, &tbl).unwrap();
            let printed = crate::printer::plain(&parsed, &tbl);
            assert_eq!(printed, src, "canonical source should round-trip");
        }
    }
}
