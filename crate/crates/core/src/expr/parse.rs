//! Recursive-descent parser for the LaTeX subset emitted by math OCR.
//!
//! Precedence, loosest first: relations, `+ -`, `* /` and implicit
//! multiplication (same level, left associative), unary minus, `^` (right
//! associative). Runs of letters are products of single-letter variables
//! unless they spell a known function name.

use thiserror::Error;

use super::ast::{BinOp, Expr, ExprKind, Func, RelOp, Span};
use super::number::Number;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("syntax error at offset {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

impl SyntaxError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        SyntaxError { offset, message: message.into() }
    }
}

/// Collapses whitespace runs (including newlines) to single spaces and trims.
pub fn normalize_ocr(src: &str) -> String {
    src.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Letter(char),
    Func(Func),
    Sum,
    Plus,
    Minus,
    Times,
    Slash,
    Caret,
    Underscore,
    Rel(RelOp),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Bar,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

const FUNCTION_WORDS: [(&str, Func); 6] = [
    ("sqrt", Func::Sqrt),
    ("sin", Func::Sin),
    ("cos", Func::Cos),
    ("tan", Func::Tan),
    ("abs", Func::Abs),
    ("ln", Func::Ln),
];

fn lex(chars: &[char]) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let simple = |tok: Tok| Token { tok, span: Span::new(start, start + 1) };
        match c {
            c if c.is_whitespace() => i += 1,
            '0'..='9' | '.' => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                if text == "." {
                    return Err(SyntaxError::new(start, "stray '.'"));
                }
                out.push(Token { tok: Tok::Num(text), span: Span::new(start, i) });
            }
            c if c.is_ascii_alphabetic() => {
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                lex_letter_run(&chars[start..i], start, &mut out);
            }
            '\\' => {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                let name: String = chars[start + 1..i].iter().collect();
                let span = Span::new(start, i);
                if name.is_empty() {
                    // Spacing commands such as `\,` and `\ ` carry no meaning here.
                    match chars.get(i) {
                        Some(',' | ';' | ':' | '!' | ' ') => {
                            i += 1;
                            continue;
                        }
                        _ => return Err(SyntaxError::new(start, "unsupported escape")),
                    }
                }
                let tok = match name.as_str() {
                    "sqrt" => Tok::Func(Func::Sqrt),
                    "sin" => Tok::Func(Func::Sin),
                    "cos" => Tok::Func(Func::Cos),
                    "tan" => Tok::Func(Func::Tan),
                    "ln" => Tok::Func(Func::Ln),
                    "sum" => Tok::Sum,
                    "cdot" | "times" => Tok::Times,
                    "div" => Tok::Slash,
                    "leq" | "le" => Tok::Rel(RelOp::Le),
                    "geq" | "ge" => Tok::Rel(RelOp::Ge),
                    "lt" => Tok::Rel(RelOp::Lt),
                    "gt" => Tok::Rel(RelOp::Gt),
                    // Sizing prefixes before a delimiter.
                    "left" | "right" => continue,
                    _ => return Err(SyntaxError::new(start, format!("unsupported command \\{name}"))),
                };
                out.push(Token { tok, span });
            }
            _ => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' | '\u{2212}' => Tok::Minus,
                    '*' | '\u{00d7}' | '\u{00b7}' => Tok::Times,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '_' => Tok::Underscore,
                    '=' => Tok::Rel(RelOp::Eq),
                    '<' => Tok::Rel(RelOp::Lt),
                    '>' => Tok::Rel(RelOp::Gt),
                    '\u{2264}' => Tok::Rel(RelOp::Le),
                    '\u{2265}' => Tok::Rel(RelOp::Ge),
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '|' => Tok::Bar,
                    _ => return Err(SyntaxError::new(start, format!("unexpected character '{c}'"))),
                };
                out.push(simple(tok));
                i += 1;
            }
        }
    }
    Ok(out)
}

fn lex_letter_run(run: &[char], offset: usize, out: &mut Vec<Token>) {
    let mut i = 0;
    'outer: while i < run.len() {
        for (word, func) in FUNCTION_WORDS {
            let len = word.len();
            if i + len <= run.len() && run[i..i + len].iter().copied().eq(word.chars()) {
                out.push(Token { tok: Tok::Func(func), span: Span::new(offset + i, offset + i + len) });
                i += len;
                continue 'outer;
            }
        }
        out.push(Token { tok: Tok::Letter(run[i]), span: Span::new(offset + i, offset + i + 1) });
        i += 1;
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
    abs_depth: usize,
}

type PResult = Result<Expr, SyntaxError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.span.start)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Span, SyntaxError> {
        match self.tokens.get(self.pos) {
            Some(t) if t.tok == want => {
                self.pos += 1;
                Ok(t.span)
            }
            _ => Err(SyntaxError::new(self.offset(), format!("expected {what}"))),
        }
    }

    fn starts_primary(&self) -> bool {
        match self.peek() {
            Some(Tok::Num(_) | Tok::Letter(_) | Tok::Func(_) | Tok::Sum | Tok::LParen | Tok::LBrace | Tok::LBracket) => {
                true
            }
            Some(Tok::Bar) => self.abs_depth == 0,
            _ => false,
        }
    }

    fn top(&mut self) -> PResult {
        let first = self.additive()?;
        let mut parts = vec![first];
        let mut ops = Vec::new();
        while let Some(Tok::Rel(op)) = self.peek().cloned() {
            self.pos += 1;
            ops.push(op);
            parts.push(self.additive()?);
        }
        if self.pos < self.tokens.len() {
            return Err(SyntaxError::new(self.offset(), "unexpected token"));
        }
        match ops.len() {
            0 => Ok(parts.pop().expect("one part")),
            1 => {
                let rhs = parts.pop().expect("rhs");
                let lhs = parts.pop().expect("lhs");
                let span = cover(&lhs, &rhs);
                Ok(Expr::with_span(ExprKind::Relation { lhs: Box::new(lhs), op: ops[0], rhs: Box::new(rhs) }, span))
            }
            _ => {
                if ops.iter().any(|op| *op != RelOp::Eq) {
                    return Err(SyntaxError::new(0, "only chains of '=' are supported"));
                }
                let span = cover(&parts[0], parts.last().expect("parts"));
                Ok(Expr::with_span(ExprKind::Chain(parts), span))
            }
        }
    }

    fn additive(&mut self) -> PResult {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult {
        let mut lhs = self.unary()?;
        loop {
            let (op, rhs) = match self.peek() {
                Some(Tok::Times) => {
                    self.pos += 1;
                    (BinOp::Mul, self.unary()?)
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    (BinOp::Div, self.unary()?)
                }
                _ if self.starts_primary() => (BinOp::Mul, self.power()?),
                _ => return Ok(lhs),
            };
            lhs = binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult {
        match self.peek() {
            Some(Tok::Minus) => {
                let start = self.next().expect("minus").span;
                let inner = self.unary()?;
                let span = start.cover(inner.span.unwrap_or(start));
                Ok(Expr::with_span(ExprKind::Neg(Box::new(inner)), span))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> PResult {
        let base = self.postfix()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exponent = self.exponent()?;
            return Ok(binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    /// Exponent atom, then right-associative `^` chaining.
    fn exponent(&mut self) -> PResult {
        let atom = self.script_atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let rest = self.exponent()?;
            return Ok(binary(BinOp::Pow, atom, rest));
        }
        Ok(atom)
    }

    /// A braced group or a single token, as TeX reads a script argument.
    /// Multi-digit numbers contribute only their first digit.
    fn script_atom(&mut self) -> PResult {
        match self.peek().cloned() {
            Some(Tok::LBrace) => {
                self.pos += 1;
                let inner = self.additive()?;
                self.expect(Tok::RBrace, "'}'")?;
                Ok(inner)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.additive()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Minus) => {
                let start = self.next().expect("minus").span;
                let inner = self.script_atom()?;
                let span = start.cover(inner.span.unwrap_or(start));
                Ok(Expr::with_span(ExprKind::Neg(Box::new(inner)), span))
            }
            Some(Tok::Num(text)) => {
                let span = self.tokens[self.pos].span;
                let first: String = text.chars().take(1).collect();
                if text.len() > 1 {
                    let rest: String = text.chars().skip(1).collect();
                    self.tokens[self.pos] = Token { tok: Tok::Num(rest), span: Span::new(span.start + 1, span.end) };
                } else {
                    self.pos += 1;
                }
                let value = Number::parse_decimal(&first).ok_or_else(|| SyntaxError::new(span.start, "bad digit"))?;
                Ok(Expr::with_span(ExprKind::Literal(value), Span::new(span.start, span.start + 1)))
            }
            Some(Tok::Letter(c)) => {
                let span = self.next().expect("letter").span;
                Ok(Expr::with_span(ExprKind::Variable(c.to_string()), span))
            }
            _ => Err(SyntaxError::new(self.offset(), "expected script argument")),
        }
    }

    fn postfix(&mut self) -> PResult {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Underscore) {
            let ExprKind::Variable(name) = &base.kind else {
                return Err(SyntaxError::new(self.offset(), "subscript on non-variable"));
            };
            let name = name.clone();
            self.pos += 1;
            let subscript = self.script_atom()?;
            let span = cover(&base, &subscript);
            return Ok(Expr::with_span(ExprKind::Indexed { base: name, subscript: Box::new(subscript) }, span));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult {
        let Some(token) = self.next() else {
            return Err(SyntaxError::new(self.end, "unexpected end of input"));
        };
        let span = token.span;
        match token.tok {
            Tok::Num(text) => {
                let value = Number::parse_decimal(&text).ok_or_else(|| SyntaxError::new(span.start, "bad number"))?;
                Ok(Expr::with_span(ExprKind::Literal(value), span))
            }
            Tok::Letter(c) => Ok(Expr::with_span(ExprKind::Variable(c.to_string()), span)),
            Tok::LParen => self.group(Tok::RParen, "')'"),
            Tok::LBrace => self.group(Tok::RBrace, "'}'"),
            Tok::LBracket => self.group(Tok::RBracket, "']'"),
            Tok::Bar => {
                self.abs_depth += 1;
                let inner = self.additive();
                self.abs_depth -= 1;
                let inner = inner?;
                let close = self.expect(Tok::Bar, "'|'")?;
                Ok(Expr::with_span(ExprKind::Function { func: Func::Abs, arg: Box::new(inner) }, span.cover(close)))
            }
            Tok::Func(func) => {
                let arg = match (func, self.peek()) {
                    (_, Some(Tok::LParen)) => {
                        self.pos += 1;
                        self.group(Tok::RParen, "')'")?
                    }
                    (_, Some(Tok::LBrace)) => {
                        self.pos += 1;
                        self.group(Tok::RBrace, "'}'")?
                    }
                    (Func::Sqrt, _) => self.script_atom()?,
                    _ => self.function_operand()?,
                };
                let full = span.cover(arg.span.unwrap_or(span));
                Ok(Expr::with_span(ExprKind::Function { func, arg: Box::new(arg) }, full))
            }
            Tok::Sum => self.summation(span),
            _ => Err(SyntaxError::new(span.start, "expected an operand")),
        }
    }

    fn group(&mut self, close: Tok, what: &str) -> PResult {
        let saved = self.abs_depth;
        self.abs_depth = 0;
        let inner = self.additive();
        self.abs_depth = saved;
        let inner = inner?;
        self.expect(close, what)?;
        Ok(inner)
    }

    /// `\sin 2x` reads as `sin(2x)`: adjacent factors up to the next
    /// operator or function.
    fn function_operand(&mut self) -> PResult {
        let mut arg = self.power()?;
        while self.starts_primary() && !matches!(self.peek(), Some(Tok::Func(_) | Tok::Sum)) {
            let rhs = self.power()?;
            arg = binary(BinOp::Mul, arg, rhs);
        }
        Ok(arg)
    }

    fn summation(&mut self, start: Span) -> PResult {
        self.expect(Tok::Underscore, "'_' after \\sum")?;
        self.expect(Tok::LBrace, "'{' after \\sum_")?;
        let index = match self.next() {
            Some(Token { tok: Tok::Letter(c), .. }) => c.to_string(),
            _ => return Err(SyntaxError::new(self.offset(), "expected summation index")),
        };
        self.expect(Tok::Rel(RelOp::Eq), "'=' in summation bound")?;
        let lower = self.additive()?;
        self.expect(Tok::RBrace, "'}'")?;
        self.expect(Tok::Caret, "'^' after summation bound")?;
        let upper = self.script_atom()?;
        let body = self.term()?;
        let span = start.cover(body.span.unwrap_or(start));
        Ok(Expr::with_span(
            ExprKind::Summation { index, lower: Box::new(lower), upper: Box::new(upper), body: Box::new(body) },
            span,
        ))
    }
}

fn cover(a: &Expr, b: &Expr) -> Span {
    match (a.span, b.span) {
        (Some(x), Some(y)) => x.cover(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => Span::new(0, 0),
    }
}

fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    let span = cover(&lhs, &rhs);
    Expr::with_span(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span)
}

/// Parses normalized LaTeX into an expression with source spans.
pub fn parse_latex(src: &str) -> Result<Expr, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let tokens = lex(&chars)?;
    if tokens.is_empty() {
        return Err(SyntaxError::new(0, "empty formula"));
    }
    let mut parser = Parser { tokens, pos: 0, end: chars.len(), abs_depth: 0 };
    parser.top()
}
