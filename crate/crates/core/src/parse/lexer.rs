use super::SyntaxError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Numeric literal as written (digits, optional fraction).
    Number(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

// longest first
const SYMBOLS: &[&str] = &[
    "<->", "::=", "<<", ">>", "->", "++", ":=", "<=", ">=", "!=", "\\forall", "\\exists", "+", "-", "*", "/", "^",
    "(", ")", "{", "}", "[", "]", "<", ">", "=", "!", "&", "|", ",", ";", "?", "'", ":", ".",
];

fn unicode_alias(c: char) -> Option<&'static str> {
    Some(match c {
        '·' | '⋅' | '×' => "*",
        '−' => "-",
        '≤' => "<=",
        '≥' => ">=",
        '≠' => "!=",
        '∧' => "&",
        '∨' => "|",
        '¬' => "!",
        '→' => "->",
        '↔' => "<->",
        '∪' => "++",
        '∀' => "\\forall",
        '∃' => "\\exists",
        _ => return None,
    })
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize, chars: &[char]| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1, &chars);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            advance(&mut i, &mut line, &mut col, 2, &chars);
            loop {
                if i + 1 >= chars.len() {
                    return Err(SyntaxError::new(l0, c0, "unterminated comment", vec![]));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance(&mut i, &mut line, &mut col, 2, &chars);
                    break;
                }
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' || (c == '.' && chars.get(i + 1) == Some(&'_')) {
            let start = i;
            let mut j = i + if c == '.' { 2 } else { 1 };
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let name: String = chars[start..j].iter().collect();
            if name == "._" {
                return Err(SyntaxError::new(l0, c0, "placeholder needs an index", vec![]));
            }
            advance(&mut i, &mut line, &mut col, j - start, &chars);
            out.push(Token { tok: Tok::Ident(name), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            let lit: String = chars[start..j].iter().collect();
            advance(&mut i, &mut line, &mut col, j - start, &chars);
            out.push(Token { tok: Tok::Number(lit), line: l0, col: c0 });
            continue;
        }
        if let Some(sym) = unicode_alias(c) {
            advance(&mut i, &mut line, &mut col, 1, &chars);
            out.push(Token { tok: Tok::Sym(sym), line: l0, col: c0 });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 8)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                advance(&mut i, &mut line, &mut col, sym.chars().count(), &chars);
                out.push(Token { tok: Tok::Sym(sym), line: l0, col: c0 });
            }
            None => return Err(SyntaxError::new(l0, c0, &format!("unexpected character {c:?}"), vec![])),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn placeholders_and_arrows() {
        assert_eq!(
            toks("sin:=._0; a<->b"),
            vec![
                Tok::Ident("sin".into()),
                Tok::Sym(":="),
                Tok::Ident("._0".into()),
                Tok::Sym(";"),
                Tok::Ident("a".into()),
                Tok::Sym("<->"),
                Tok::Ident("b".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(toks("a·b ≤ c"), toks("a*b <= c"));
        assert_eq!(toks("p ∪ q"), toks("p ++ q"));
    }

    #[test]
    fn comments_skipped_and_positions_tracked() {
        let t = tokenize("/* x\n y */ z").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("z".into()));
        assert_eq!((t[0].line, t[0].col), (2, 7));
    }

    #[test]
    fn decimal_literals() {
        assert_eq!(toks("9.81"), vec![Tok::Number("9.81".into()), Tok::Eof]);
    }
}
