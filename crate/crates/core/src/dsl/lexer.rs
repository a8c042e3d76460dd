use super::DslError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Num(f64),
    /// A number immediately followed by `i`.
    Imag(f64),
    Sym(char),
    Arrow,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(x) => format!("number {x}"),
            Tok::Imag(x) => format!("imaginary {x}i"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Arrow => "`->`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Splits source into tokens. Newlines inside `(...)` or `[...]` are
/// dropped so long matrices may span lines; `#` starts a comment.
pub(crate) fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let mut out = Vec::new();
    let mut depth: usize = 0;
    for (li, line) in src.lines().enumerate() {
        let line_no = li + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let ch = chars[i];
            let col = i + 1;
            let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: line_no, col });
            if ch == '#' {
                break;
            }
            if ch.is_whitespace() {
                i += 1;
                continue;
            }
            if ch.is_ascii_alphabetic() || ch == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
                continue;
            }
            if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value: f64 = text.parse().map_err(|_| DslError::Syntax {
                    line: line_no,
                    col,
                    expected: "a number".into(),
                })?;
                let imag = i < chars.len()
                    && chars[i] == 'i'
                    && !chars.get(i + 1).is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_');
                if imag {
                    i += 1;
                    push(&mut out, Tok::Imag(value));
                } else {
                    push(&mut out, Tok::Num(value));
                }
                continue;
            }
            if ch == '-' && chars.get(i + 1) == Some(&'>') {
                push(&mut out, Tok::Arrow);
                i += 2;
                continue;
            }
            match ch {
                '(' | '[' => depth += 1,
                ')' | ']' => depth = depth.saturating_sub(1),
                '=' | ':' | ';' | '*' | ',' | '+' | '-' => {}
                _ => {
                    return Err(DslError::Syntax {
                        line: line_no,
                        col,
                        expected: format!("a token, found `{ch}`"),
                    })
                }
            }
            push(&mut out, Tok::Sym(ch));
            i += 1;
        }
        if depth == 0 && out.last().is_some_and(|t| t.tok != Tok::Newline) {
            out.push(Token {
                tok: Tok::Newline,
                line: line_no,
                col: chars.len() + 1,
            });
        }
    }
    let line = src.lines().count().max(1);
    out.push(Token { tok: Tok::Eof, line, col: 1 });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn complex_literals() {
        assert_eq!(
            toks("0.5+1e-3i -2-0i"),
            vec![
                Tok::Num(0.5),
                Tok::Sym('+'),
                Tok::Imag(1e-3),
                Tok::Sym('-'),
                Tok::Num(2.0),
                Tok::Sym('-'),
                Tok::Imag(0.0),
                Tok::Newline,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn brackets_join_lines_and_comments_vanish() {
        let t = toks("gen a = [[1+0i], # first\n [0+0i]]\n\n# only a comment\n");
        assert_eq!(t.iter().filter(|t| **t == Tok::Newline).count(), 1);
        assert!(!t.iter().any(|t| matches!(t, Tok::Ident(s) if s == "first")));
    }

    #[test]
    fn arrow_and_positions() {
        let t = lex("gen f : q -> q").unwrap();
        assert_eq!(t[4].tok, Tok::Arrow);
        assert_eq!((t[4].line, t[4].col), (1, 11));
    }

    #[test]
    fn stray_character() {
        assert!(matches!(lex("wire q @ 2"), Err(DslError::Syntax { line: 1, col: 8, .. })));
    }
}
