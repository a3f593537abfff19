use super::diagnostic::{ParseDiagnostic, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Id(String),
    Nat(u64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Tilde,
    Arrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Id(s) => format!("`{s}`"),
            Tok::Nat(n) => format!("number {n}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
    /// First token on its line; declarations restart here after an error.
    pub line_start: bool,
}

/// Splits `src` into tokens. Lexical errors are reported and the offending
/// characters skipped, so the token stream always ends with `Eof`.
pub(crate) fn lex(src: &str) -> (Vec<Token>, Vec<ParseDiagnostic>) {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut fresh_line = true;

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            fresh_line = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Some(Tok::Id(chars[start..i].iter().collect()))
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            match text.parse() {
                Ok(n) => Some(Tok::Nat(n)),
                Err(_) => {
                    diags.push(ParseDiagnostic::error(pos, "NumberTooLarge", format!("number {text} is too large")));
                    None
                }
            }
        } else if c == '"' {
            i += 1;
            let mut text = String::new();
            let mut closed = false;
            while i < chars.len() && chars[i] != '\n' {
                match chars[i] {
                    '"' => {
                        closed = true;
                        i += 1;
                        break;
                    }
                    '\\' if i + 1 < chars.len() && matches!(chars[i + 1], '"' | '\\' | 'n') => {
                        text.push(if chars[i + 1] == 'n' { '\n' } else { chars[i + 1] });
                        i += 2;
                    }
                    ch => {
                        text.push(ch);
                        i += 1;
                    }
                }
            }
            if closed {
                Some(Tok::Str(text))
            } else {
                diags.push(ParseDiagnostic::error(pos, "UnterminatedString", "string literal is not closed on this line"));
                None
            }
        } else {
            i += 1;
            match c {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                '[' => Some(Tok::LBracket),
                ']' => Some(Tok::RBracket),
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                ',' => Some(Tok::Comma),
                ':' => Some(Tok::Colon),
                '~' => Some(Tok::Tilde),
                '-' if chars.get(i) == Some(&'>') => {
                    i += 1;
                    Some(Tok::Arrow)
                }
                _ => {
                    diags.push(ParseDiagnostic::error(pos, "InvalidCharacter", format!("unexpected character {c:?}")));
                    None
                }
            }
        };
        col += i - start;
        if let Some(tok) = tok {
            tokens.push(Token {
                tok,
                pos,
                line_start: fresh_line,
            });
            fresh_line = false;
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
        line_start: true,
    });
    (tokens, diags)
}

/// Cursor over a token stream with the helpers both grammars share.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    at: usize,
}

impl Cursor {
    pub fn new(tokens: Vec<Token>) -> Cursor {
        Cursor { tokens, at: 0 }
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    pub fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Id(s) if s == kw)
    }

    pub fn unexpected(&self, wanted: &str) -> ParseDiagnostic {
        let t = self.peek();
        let code = if t.tok == Tok::Eof { "UnexpectedEof" } else { "UnexpectedToken" };
        ParseDiagnostic::error(t.pos, code, format!("expected {wanted}, found {}", t.tok.describe()))
    }

    pub fn expect(&mut self, tok: Tok) -> Result<Pos, ParseDiagnostic> {
        if self.peek().tok == tok {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    pub fn keyword(&mut self, kw: &str) -> Result<Pos, ParseDiagnostic> {
        if self.is_keyword(kw) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<(String, Pos), ParseDiagnostic> {
        match &self.peek().tok {
            Tok::Id(s) => {
                let s = s.clone();
                Ok((s, self.bump().pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn nat(&mut self) -> Result<u64, ParseDiagnostic> {
        match self.peek().tok {
            Tok::Nat(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    pub fn string(&mut self) -> Result<(String, Pos), ParseDiagnostic> {
        match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                Ok((s, self.bump().pos))
            }
            _ => Err(self.unexpected("a string literal")),
        }
    }

    pub fn eat(&mut self, tok: Tok) -> bool {
        if self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn mark(&self) -> usize {
        self.at
    }

    /// Skips to the next token that opens a line and satisfies `starts`,
    /// making progress past `mark` in any case.
    pub fn recover(&mut self, mark: usize, starts: impl Fn(&Cursor) -> bool) {
        if self.at == mark {
            self.bump();
        }
        while !self.at_eof() && !(self.peek().line_start && starts(self)) {
            self.bump();
        }
    }
}
