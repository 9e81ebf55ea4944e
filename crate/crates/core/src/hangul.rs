//! Hangul syllable ↔ compatibility-jamo conversion.
//!
//! Precomposed syllables (U+AC00–U+D7A3) decompose arithmetically into a
//! leading consonant, a vowel, and an optional trailing consonant, rendered
//! as compatibility jamo (U+3131–U+3163): one character per keystroke on a
//! two-set Korean keyboard. [`compose`] is the greedy left-to-right inverse:
//! `compose(decompose(t)) == t` for any text whose Hangul is made of
//! precomposed syllables. Non-Hangul code points pass through unchanged, and
//! jamo that do not form a syllable stay literal.

const S_BASE: u32 = 0xAC00;
const S_COUNT: u32 = 11_172;
const V_COUNT: u32 = 21;
const T_COUNT: u32 = 28; // index 0 = no trailing consonant
const N_COUNT: u32 = V_COUNT * T_COUNT;

/// Leading consonants (choseong) by L index.
const CHOSEONG: [char; 19] = [
    'ㄱ', 'ㄲ', 'ㄴ', 'ㄷ', 'ㄸ', 'ㄹ', 'ㅁ', 'ㅂ', 'ㅃ', 'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ', 'ㅉ', 'ㅊ',
    'ㅋ', 'ㅌ', 'ㅍ', 'ㅎ',
];

/// Vowels (jungseong) by V index.
const JUNGSEONG: [char; 21] = [
    'ㅏ', 'ㅐ', 'ㅑ', 'ㅒ', 'ㅓ', 'ㅔ', 'ㅕ', 'ㅖ', 'ㅗ', 'ㅘ', 'ㅙ', 'ㅚ', 'ㅛ', 'ㅜ', 'ㅝ',
    'ㅞ', 'ㅟ', 'ㅠ', 'ㅡ', 'ㅢ', 'ㅣ',
];

/// Trailing consonants (jongseong) by T index − 1 (T index 0 means none).
const JONGSEONG: [char; 27] = [
    'ㄱ', 'ㄲ', 'ㄳ', 'ㄴ', 'ㄵ', 'ㄶ', 'ㄷ', 'ㄹ', 'ㄺ', 'ㄻ', 'ㄼ', 'ㄽ', 'ㄾ', 'ㄿ', 'ㅀ',
    'ㅁ', 'ㅂ', 'ㅄ', 'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ', 'ㅊ', 'ㅋ', 'ㅌ', 'ㅍ', 'ㅎ',
];

/// Whether `c` is a precomposed Hangul syllable.
pub fn is_syllable(c: char) -> bool {
    (S_BASE..S_BASE + S_COUNT).contains(&(c as u32))
}

/// Whether `c` is a compatibility jamo consonant or vowel (U+3131–U+3163).
pub fn is_compat_jamo(c: char) -> bool {
    (0x3131..=0x3163).contains(&(c as u32))
}

fn choseong_index(c: char) -> Option<u32> {
    CHOSEONG.iter().position(|&x| x == c).map(|i| i as u32)
}

fn jungseong_index(c: char) -> Option<u32> {
    JUNGSEONG.iter().position(|&x| x == c).map(|i| i as u32)
}

fn jongseong_index(c: char) -> Option<u32> {
    JONGSEONG.iter().position(|&x| x == c).map(|i| i as u32 + 1)
}

/// Decomposes one syllable into `(leading, vowel, optional trailing)`.
pub fn decompose_syllable(c: char) -> Option<(char, char, Option<char>)> {
    if !is_syllable(c) {
        return None;
    }
    let offset = c as u32 - S_BASE;
    let l = offset / N_COUNT;
    let v = (offset % N_COUNT) / T_COUNT;
    let t = offset % T_COUNT;
    let trailing = if t == 0 {
        None
    } else {
        Some(JONGSEONG[(t - 1) as usize])
    };
    Some((CHOSEONG[l as usize], JUNGSEONG[v as usize], trailing))
}

/// Composes one syllable from compatibility jamo, if the triple is valid.
pub fn compose_syllable(l: char, v: char, t: Option<char>) -> Option<char> {
    let l = choseong_index(l)?;
    let v = jungseong_index(v)?;
    let t = match t {
        None => 0,
        Some(c) => jongseong_index(c)?,
    };
    char::from_u32(S_BASE + l * N_COUNT + v * T_COUNT + t)
}

/// Expands every precomposed syllable in `text` into compatibility jamo.
/// All other code points pass through unchanged.
pub fn decompose(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match decompose_syllable(c) {
            Some((l, v, t)) => {
                out.push(l);
                out.push(v);
                if let Some(t) = t {
                    out.push(t);
                }
            }
            None => out.push(c),
        }
    }
    out
}

/// Greedy left-to-right inverse of [`decompose`].
///
/// A leading-capable consonant followed by a vowel starts a syllable; a
/// following trailing-capable consonant is attached unless the jamo after
/// it is a vowel (in which case it leads the next syllable).
pub fn compose(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let composed = try_compose_at(&chars, i);
        match composed {
            Some((syllable, consumed)) => {
                out.push(syllable);
                i += consumed;
            }
            None => {
                out.push(chars[i]);
                i += 1;
            }
        }
    }
    out
}

fn try_compose_at(chars: &[char], i: usize) -> Option<(char, usize)> {
    let l = *chars.get(i)?;
    let v = *chars.get(i + 1)?;
    if choseong_index(l).is_none() || jungseong_index(v).is_none() {
        return None;
    }
    let trailing = match chars.get(i + 2) {
        Some(&t)
            if jongseong_index(t).is_some()
                && chars.get(i + 3).is_none_or(|&n| jungseong_index(n).is_none()) =>
        {
            Some(t)
        }
        _ => None,
    };
    let consumed = if trailing.is_some() { 3 } else { 2 };
    compose_syllable(l, v, trailing).map(|s| (s, consumed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposes_known_syllables() {
        assert_eq!(decompose("한"), "ㅎㅏㄴ");
        assert_eq!(decompose("가"), "ㄱㅏ");
        assert_eq!(decompose("닭"), "ㄷㅏㄺ");
        assert_eq!(decompose("한글"), "ㅎㅏㄴㄱㅡㄹ");
    }

    #[test]
    fn passes_through_non_hangul() {
        assert_eq!(decompose("cat"), "cat");
        assert_eq!(compose("cat"), "cat");
        assert_eq!(decompose("a한b"), "aㅎㅏㄴb");
    }

    #[test]
    fn composes_at_syllable_boundaries() {
        // Trailing consonant vs. leading consonant of the next syllable.
        assert_eq!(compose("ㅎㅏㄴㄱㅡㄹ"), "한글");
        assert_eq!(compose("ㅎㅏㄴㅏ"), "하나");
        assert_eq!(compose("ㄷㅏㄺ"), "닭");
    }

    #[test]
    fn uncomposable_jamo_stay_literal() {
        assert_eq!(compose("ㅏㄴ"), "ㅏㄴ"); // vowel first: no syllable
        assert_eq!(compose("ㄱ"), "ㄱ");
        assert_eq!(compose("ㄳㅏ"), "ㄳㅏ"); // ㄳ cannot lead
    }

    #[test]
    fn round_trip_all_syllables() {
        for code in S_BASE..S_BASE + S_COUNT {
            let c = char::from_u32(code).unwrap();
            let s = c.to_string();
            assert_eq!(compose(&decompose(&s)), s, "syllable U+{code:04X}");
        }
    }

    #[test]
    fn round_trip_mixed_text() {
        let text = "역시! MT는 한글 텍스트를 잘 다룬다 (really).";
        assert_eq!(compose(&decompose(text)), text);
    }
}
