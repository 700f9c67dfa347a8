use crate::error::Diagnostic;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Lower(String),
    Upper(String),
    Anon,
    Num(f64),
    Str(String),
    Char(char),
    Bottom,
    /// `-->`
    Arrow,
    /// `-0.9->` or `-(0.9,0.8)->`; carries the literal text between `-` and `->`.
    AttArrow(String),
    /// `<==`
    If,
    /// `->` in statements
    Yields,
    EqEq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Colon,
    ColonColon,
    Equals,
    Comma,
    Bar,
    Hash,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '$'
}

impl Lexer {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(self.line, self.col, msg)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek(i) == Some(c))
    }

    /// Length of a qualification literal followed by `->`, starting after `-`.
    fn attenuation_len(&self) -> Option<usize> {
        let mut i = 1;
        let mut depth = 0i32;
        let mut saw_digit = false;
        loop {
            let c = self.peek(i)?;
            match c {
                '0'..='9' => saw_digit = true,
                '.' | 'e' | 'E' | ' ' | ',' => {}
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth < 0 {
                        return None;
                    }
                }
                '-' if depth == 0 => {
                    return (saw_digit && self.peek(i + 1) == Some('>')).then_some(i);
                }
                '-' => {}
                _ => return None,
            }
            i += 1;
        }
    }

    fn number(&mut self) -> Result<f64, Diagnostic> {
        let start = self.pos;
        while matches!(self.peek(0), Some('0'..='9')) {
            self.bump();
        }
        if self.peek(0) == Some('.') && matches!(self.peek(1), Some('0'..='9')) {
            self.bump();
            while matches!(self.peek(0), Some('0'..='9')) {
                self.bump();
            }
        }
        if matches!(self.peek(0), Some('e' | 'E')) {
            let sign = matches!(self.peek(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if matches!(self.peek(digit_at), Some('0'..='9')) {
                for _ in 0..digit_at {
                    self.bump();
                }
                while matches!(self.peek(0), Some('0'..='9')) {
                    self.bump();
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map_err(|_| self.err(format!("malformed number `{text}`")))
    }

    fn escape(&mut self) -> Result<char, Diagnostic> {
        match self.bump() {
            Some('n') => Ok('\n'),
            Some('t') => Ok('\t'),
            Some('\\') => Ok('\\'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            other => Err(self.err(format!("unknown escape `\\{}`", other.unwrap_or(' ')))),
        }
    }

    fn next_token(&mut self) -> Result<Token, Diagnostic> {
        loop {
            match self.peek(0) {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('-') if self.peek(1) == Some('-') && self.peek(2) != Some('>') => {
                    while let Some(c) = self.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
        let (line, col) = (self.line, self.col);
        let tok = |t: Tok| Ok(Token { tok: t, line, col });
        let Some(c) = self.peek(0) else {
            return tok(Tok::Eof);
        };
        let fixed: &[(&str, Tok)] = &[
            ("_|_", Tok::Bottom),
            ("-->", Tok::Arrow),
            ("<==", Tok::If),
            ("->", Tok::Yields),
            ("==", Tok::EqEq),
            ("/=", Tok::Neq),
            ("<=", Tok::Le),
            (">=", Tok::Ge),
            ("::", Tok::ColonColon),
        ];
        for (text, t) in fixed {
            if self.starts_with(text) {
                for _ in 0..text.chars().count() {
                    self.bump();
                }
                return tok(t.clone());
            }
        }
        if c == '-' {
            if let Some(n) = self.attenuation_len() {
                let text: String = self.chars[self.pos + 1..self.pos + n].iter().collect();
                for _ in 0..n + 2 {
                    self.bump();
                }
                return tok(Tok::AttArrow(text.trim().to_string()));
            }
        }
        if c == '⊥' {
            self.bump();
            return tok(Tok::Bottom);
        }
        if c.is_ascii_digit() {
            let x = self.number()?;
            return tok(Tok::Num(x));
        }
        if c == '"' {
            self.bump();
            let mut s = String::new();
            loop {
                match self.bump() {
                    None => return Err(Diagnostic::new(line, col, "unterminated string literal")),
                    Some('"') => break,
                    Some('\\') => s.push(self.escape()?),
                    Some(ch) => s.push(ch),
                }
            }
            return tok(Tok::Str(s));
        }
        if c == '\'' {
            self.bump();
            let ch = match self.bump() {
                Some('\\') => self.escape()?,
                Some(ch) => ch,
                None => return Err(Diagnostic::new(line, col, "unterminated character literal")),
            };
            if self.bump() != Some('\'') {
                return Err(Diagnostic::new(line, col, "unterminated character literal"));
            }
            return tok(Tok::Char(ch));
        }
        if c.is_alphabetic() || c == '_' || c == '$' {
            let start = self.pos;
            while self.peek(0).is_some_and(ident_char) {
                self.bump();
            }
            let text: String = self.chars[start..self.pos].iter().collect();
            if text == "_" {
                return tok(Tok::Anon);
            }
            let first = text.trim_start_matches('$').chars().next();
            return match first {
                Some(f) if f.is_uppercase() || f == '_' => tok(Tok::Upper(text)),
                Some(_) => tok(Tok::Lower(text)),
                None => Err(Diagnostic::new(line, col, format!("malformed identifier `{text}`"))),
            };
        }
        self.bump();
        let t = match c {
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            ':' => Tok::Colon,
            '=' => Tok::Equals,
            ',' => Tok::Comma,
            '|' => Tok::Bar,
            '#' => Tok::Hash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            other => {
                return Err(Diagnostic::new(line, col, format!("unexpected character `{other}`")))
            }
        };
        tok(t)
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let eof = t.tok == Tok::Eof;
        out.push(t);
        if eof {
            return Ok(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_and_comments() {
        assert_eq!(
            toks("f -0.9-> x -- note\ng --> y"),
            vec![
                Tok::Lower("f".into()),
                Tok::AttArrow("0.9".into()),
                Tok::Lower("x".into()),
                Tok::Lower("g".into()),
                Tok::Arrow,
                Tok::Lower("y".into()),
                Tok::Eof
            ]
        );
        assert_eq!(toks("-(0.9, 0.8)->")[0], Tok::AttArrow("(0.9, 0.8)".into()));
    }

    #[test]
    fn minus_is_not_an_arrow() {
        assert_eq!(
            toks("X - 1"),
            vec![Tok::Upper("X".into()), Tok::Minus, Tok::Num(1.0), Tok::Eof]
        );
    }

    #[test]
    fn identifiers_and_literals() {
        assert_eq!(
            toks("_T _ f' $W0 'a' \"ab\" _|_"),
            vec![
                Tok::Upper("_T".into()),
                Tok::Anon,
                Tok::Lower("f'".into()),
                Tok::Upper("$W0".into()),
                Tok::Char('a'),
                Tok::Str("ab".into()),
                Tok::Bottom,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_are_reported() {
        let err = tokenize("f --> x\n  @").unwrap_err();
        assert_eq!((err.line, err.col), (2, 3));
    }
}
