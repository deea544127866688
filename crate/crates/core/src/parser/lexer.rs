use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Eq,
    StarEq,
    Star,
    Plus,
    Bar,
    Arrow,
    ColonColon,
    Colon,
    Caret,
    Dot,
    Mu,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Eq => "=",
            Tok::StarEq => "*=",
            Tok::Star => "*",
            Tok::Plus => "+",
            Tok::Bar => "|",
            Tok::Arrow => "->",
            Tok::ColonColon => "::",
            Tok::Colon => ":",
            Tok::Caret => "^",
            Tok::Dot => ".",
            Tok::Mu => "mu",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn ident_start(ch: char) -> bool {
    ch.is_ascii_alphabetic() || ch == '_'
}

fn ident_continue(ch: char) -> bool {
    ch.is_ascii_alphanumeric() || ch == '_' || ch == '\'' || ch == '#'
}

pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let ch = chars[i];
        let span = Span { line, column: col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if ch == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if ident_start(ch) {
            let start = i;
            while i < chars.len() && ident_continue(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if word == "mu" { Tok::Mu } else { Tok::Ident(word) };
            out.push(Token { tok, span });
            continue;
        }
        if ch.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let n = text.parse().map_err(|_| SyntaxError {
                line: span.line,
                column: span.column,
                expected: vec!["number that fits in 64 bits".into()],
                found: text.clone(),
            })?;
            out.push(Token { tok: Tok::Num(n), span });
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, len) = match two.as_str() {
            "*=" => (Tok::StarEq, 2),
            "->" => (Tok::Arrow, 2),
            "::" => (Tok::ColonColon, 2),
            _ => match ch {
                ';' => (Tok::Semi, 1),
                ',' => (Tok::Comma, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                '<' => (Tok::Lt, 1),
                '>' => (Tok::Gt, 1),
                '=' => (Tok::Eq, 1),
                '*' | '⊗' => (Tok::Star, 1),
                '+' => (Tok::Plus, 1),
                '|' => (Tok::Bar, 1),
                ':' => (Tok::Colon, 1),
                '^' => (Tok::Caret, 1),
                '.' => (Tok::Dot, 1),
                'μ' => (Tok::Mu, 1),
                '→' => (Tok::Arrow, 1),
                _ => {
                    return Err(SyntaxError {
                        line,
                        column: col,
                        expected: vec!["token".into()],
                        found: ch.to_string(),
                    })
                }
            },
        };
        out.push(Token { tok, span });
        advance(len, &mut i, &mut col);
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, column: col } });
    Ok(out)
}
