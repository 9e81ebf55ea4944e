//! Whitespace tokenization that preserves the segment byte-exactly.
//!
//! A segment is viewed as an alternating sequence of whitespace runs and
//! tokens; concatenating the pieces in order reproduces the original text
//! exactly, including leading/trailing whitespace.

/// One maximal run of a segment: either a token or the whitespace between
/// tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece<'a> {
    Token(TokenView<'a>),
    Whitespace(&'a str),
}

/// A whitespace-delimited token with its byte span in the segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenView<'a> {
    pub text: &'a str,
    /// Byte offset of the token within the segment.
    pub byte_start: usize,
    /// 0-based position among the segment's tokens.
    pub token_index: usize,
}

/// Splits `text` into alternating whitespace runs and tokens.
pub fn split_pieces(text: &str) -> Vec<Piece<'_>> {
    let mut pieces = Vec::new();
    let mut token_index = 0;
    let mut run_start = 0;
    let mut run_is_ws: Option<bool> = None;

    for (offset, ch) in text.char_indices() {
        let is_ws = ch.is_whitespace();
        match run_is_ws {
            Some(prev) if prev == is_ws => {}
            Some(prev) => {
                push_piece(text, run_start, offset, prev, &mut token_index, &mut pieces);
                run_start = offset;
                run_is_ws = Some(is_ws);
            }
            None => run_is_ws = Some(is_ws),
        }
    }
    if let Some(prev) = run_is_ws {
        push_piece(text, run_start, text.len(), prev, &mut token_index, &mut pieces);
    }
    pieces
}

fn push_piece<'a>(
    text: &'a str,
    start: usize,
    end: usize,
    is_ws: bool,
    token_index: &mut usize,
    out: &mut Vec<Piece<'a>>,
) {
    if start == end {
        return;
    }
    let slice = &text[start..end];
    if is_ws {
        out.push(Piece::Whitespace(slice));
    } else {
        out.push(Piece::Token(TokenView {
            text: slice,
            byte_start: start,
            token_index: *token_index,
        }));
        *token_index += 1;
    }
}

/// Iterates the tokens of `text` in order.
pub fn tokens(text: &str) -> impl Iterator<Item = TokenView<'_>> {
    split_pieces(text).into_iter().filter_map(|p| match p {
        Piece::Token(t) => Some(t),
        Piece::Whitespace(_) => None,
    })
}

/// Number of whitespace-delimited words in `text`.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}
