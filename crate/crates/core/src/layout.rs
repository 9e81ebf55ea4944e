//! Keyboard layouts for key noise.
//!
//! A layout is a versioned plain-text data file with three sections:
//!
//! ```text
//! # free-form comment lines
//! id qwerty
//! version 1
//! mode chars                # `chars` (default) or `jamo`
//! row 0 q w e r t y u i o p # physical key rows; the number is the row's
//! row 0.25 a s d f g h j k l  # horizontal offset in key units
//! row 0.75 z x c v b n m
//! alias Ä ä                 # optional: fold a key onto another (shift layer)
//! adjacency q w a s         # key followed by its neighbors
//! ```
//!
//! The `adjacency` section is the authoritative data; the rows document the
//! geometry it was derived from. For the builtin layouts the neighbor lists
//! come from [`derive_adjacency`]: the horizontally adjacent keys on the same
//! row plus the two nearest keys on each adjacent row, then symmetrized so
//! that `a ∈ adj(b) ⟺ b ∈ adj(a)` holds at the key-position level. Loading
//! validates symmetry, nonempty neighbor lists, and that every referenced key
//! appears in a row.
//!
//! Layouts with `mode jamo` (Dubeolsik) are applied after Hangul syllables
//! are decomposed to compatibility jamo; the shifted jamo ㅃㅉㄸㄲㅆㅒㅖ are
//! aliased to their base key, and replacements always insert base-layer jamo
//! since shift state is not recoverable from text.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::fsutil;

/// Which unit the layout perturbs: raw code points or decomposed jamo.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbSpace {
    Chars,
    Jamo,
}

/// The four builtin layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayoutKind {
    Qwerty,
    Qwertz,
    Azerty,
    Dubeolsik,
}

impl LayoutKind {
    pub const ALL: [LayoutKind; 4] = [
        LayoutKind::Qwerty,
        LayoutKind::Qwertz,
        LayoutKind::Azerty,
        LayoutKind::Dubeolsik,
    ];

    pub fn id(self) -> &'static str {
        match self {
            LayoutKind::Qwerty => "qwerty",
            LayoutKind::Qwertz => "qwertz",
            LayoutKind::Azerty => "azerty",
            LayoutKind::Dubeolsik => "dubeolsik",
        }
    }
}

impl FromStr for LayoutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qwerty" => Ok(LayoutKind::Qwerty),
            "qwertz" => Ok(LayoutKind::Qwertz),
            "azerty" => Ok(LayoutKind::Azerty),
            "dubeolsik" => Ok(LayoutKind::Dubeolsik),
            other => Err(Error::Layout(format!("unknown layout id `{other}`"))),
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// An immutable, validated keyboard layout.
#[derive(Debug, Clone)]
pub struct KeyboardLayout {
    pub id: String,
    pub version: u32,
    pub space: PerturbSpace,
    /// SHA-256 of the source file, recorded into noise provenance.
    pub checksum: String,
    adjacency: HashMap<char, Vec<char>>,
    aliases: HashMap<char, char>,
}

impl KeyboardLayout {
    /// Neighbor list for `c`, folding aliases and letter case.
    ///
    /// Lookup order: the key itself, its alias target, then the same two
    /// steps on the lowercase form of `c`.
    pub fn neighbors(&self, c: char) -> Option<&[char]> {
        if let Some(n) = self.lookup(c) {
            return Some(n);
        }
        let mut lower = c.to_lowercase();
        match (lower.next(), lower.next()) {
            (Some(l), None) if l != c => self.lookup(l),
            _ => None,
        }
    }

    fn lookup(&self, c: char) -> Option<&[char]> {
        if let Some(n) = self.adjacency.get(&c) {
            return Some(n.as_slice());
        }
        self.aliases
            .get(&c)
            .and_then(|base| self.adjacency.get(base))
            .map(|n| n.as_slice())
    }

    pub fn has_neighbors(&self, c: char) -> bool {
        self.neighbors(c).is_some()
    }

    /// Parses and validates a layout from file content.
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let def = LayoutDef::parse(src, origin)?;
        def.validate(origin)?;
        Ok(KeyboardLayout {
            id: def.id.clone(),
            version: def.version,
            space: def.space,
            checksum: fsutil::sha256_hex(src.as_bytes()),
            adjacency: def
                .adjacency
                .iter()
                .map(|(k, v)| (*k, v.iter().copied().collect()))
                .collect(),
            aliases: def.aliases.clone(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = fsutil::read_utf8(path)?;
        Self::parse(&src, &path.display().to_string())
    }

    /// A builtin layout, parsed once and shared.
    pub fn builtin(kind: LayoutKind) -> Arc<KeyboardLayout> {
        static CACHE: OnceLock<HashMap<LayoutKind, Arc<KeyboardLayout>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| {
            LayoutKind::ALL
                .iter()
                .map(|&k| {
                    let src = builtin_source(k);
                    let layout = KeyboardLayout::parse(src, k.id())
                        .unwrap_or_else(|e| panic!("builtin layout {k} invalid: {e}"));
                    (k, Arc::new(layout))
                })
                .collect()
        });
        Arc::clone(&cache[&kind])
    }

    /// Resolves a `--layout` argument: a builtin id or a path to a file.
    pub fn resolve(spec: &str) -> Result<Arc<KeyboardLayout>> {
        match spec.parse::<LayoutKind>() {
            Ok(kind) => Ok(Self::builtin(kind)),
            Err(_) if Path::new(spec).exists() => Ok(Arc::new(Self::load(Path::new(spec))?)),
            Err(e) => Err(e),
        }
    }
}

/// Raw on-disk representation of a layout file.
#[derive(Debug, Clone)]
pub struct LayoutDef {
    pub id: String,
    pub version: u32,
    pub space: PerturbSpace,
    pub rows: Vec<(f64, Vec<char>)>,
    pub aliases: HashMap<char, char>,
    pub adjacency: BTreeMap<char, BTreeSet<char>>,
}

impl LayoutDef {
    fn parse(src: &str, origin: &str) -> Result<Self> {
        let malformed = |line: usize, message: String| Error::Malformed {
            format: "layout",
            path: origin.into(),
            line,
            message,
        };
        let single_char = |line: usize, tok: &str| -> Result<char> {
            let mut chars = tok.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(malformed(line, format!("key `{tok}` is not a single code point"))),
            }
        };

        let mut id = None;
        let mut version = None;
        let mut space = PerturbSpace::Chars;
        let mut rows = Vec::new();
        let mut aliases = HashMap::new();
        let mut adjacency: BTreeMap<char, BTreeSet<char>> = BTreeMap::new();

        for (lineno, raw) in src.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let keyword = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            match keyword {
                "id" => {
                    id = Some(
                        rest.first()
                            .ok_or_else(|| malformed(lineno, "missing id value".into()))?
                            .to_string(),
                    );
                }
                "version" => {
                    version = Some(rest.first().and_then(|v| v.parse().ok()).ok_or_else(
                        || malformed(lineno, "version must be an integer".into()),
                    )?);
                }
                "mode" => {
                    space = match rest.first().copied() {
                        Some("chars") => PerturbSpace::Chars,
                        Some("jamo") => PerturbSpace::Jamo,
                        other => {
                            return Err(malformed(
                                lineno,
                                format!("unknown mode {other:?}; expected chars|jamo"),
                            ))
                        }
                    };
                }
                "row" => {
                    let offset: f64 = rest
                        .first()
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| malformed(lineno, "row needs a numeric offset".into()))?;
                    let keys = rest[1..]
                        .iter()
                        .map(|t| single_char(lineno, t))
                        .collect::<Result<Vec<char>>>()?;
                    if keys.is_empty() {
                        return Err(malformed(lineno, "row has no keys".into()));
                    }
                    rows.push((offset, keys));
                }
                "alias" => {
                    if rest.len() != 2 {
                        return Err(malformed(lineno, "alias takes exactly two keys".into()));
                    }
                    aliases.insert(single_char(lineno, rest[0])?, single_char(lineno, rest[1])?);
                }
                "adjacency" => {
                    if rest.len() < 2 {
                        return Err(malformed(lineno, "adjacency needs a key and ≥1 neighbor".into()));
                    }
                    let key = single_char(lineno, rest[0])?;
                    let neighbors = rest[1..]
                        .iter()
                        .map(|t| single_char(lineno, t))
                        .collect::<Result<BTreeSet<char>>>()?;
                    if adjacency.insert(key, neighbors).is_some() {
                        return Err(malformed(lineno, format!("duplicate adjacency for `{key}`")));
                    }
                }
                other => return Err(malformed(lineno, format!("unknown directive `{other}`"))),
            }
        }

        Ok(LayoutDef {
            id: id.ok_or_else(|| Error::Layout(format!("{origin}: missing `id`")))?,
            version: version.ok_or_else(|| Error::Layout(format!("{origin}: missing `version`")))?,
            space,
            rows,
            aliases,
            adjacency,
        })
    }

    fn validate(&self, origin: &str) -> Result<()> {
        let err = |msg: String| Error::Layout(format!("{origin}: {msg}"));
        let row_keys: BTreeSet<char> = self.rows.iter().flat_map(|(_, ks)| ks.iter().copied()).collect();
        if self.adjacency.is_empty() {
            return Err(err("no adjacency entries".into()));
        }
        for (&key, neighbors) in &self.adjacency {
            if neighbors.is_empty() {
                return Err(err(format!("key `{key}` has an empty neighbor list")));
            }
            if !row_keys.contains(&key) {
                return Err(err(format!("adjacency key `{key}` does not appear in any row")));
            }
            for &n in neighbors {
                if n == key {
                    return Err(err(format!("key `{key}` lists itself as a neighbor")));
                }
                if !row_keys.contains(&n) {
                    return Err(err(format!("neighbor `{n}` of `{key}` does not appear in any row")));
                }
                if !self.adjacency.get(&n).is_some_and(|m| m.contains(&key)) {
                    return Err(err(format!("adjacency not symmetric: {key} → {n} but not {n} → {key}")));
                }
            }
        }
        for (&from, &to) in &self.aliases {
            if !row_keys.contains(&to) {
                return Err(err(format!("alias target `{to}` of `{from}` is not a row key")));
            }
            if self.adjacency.contains_key(&from) {
                return Err(err(format!("alias source `{from}` also has its own adjacency")));
            }
        }
        Ok(())
    }

    /// Renders the definition back into the layout file format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {} keyboard layout\n", self.id));
        out.push_str(
            "# adjacency = same-row neighbors + 2 nearest keys per adjacent row, symmetrized\n",
        );
        out.push_str(&format!("id {}\n", self.id));
        out.push_str(&format!("version {}\n", self.version));
        if self.space == PerturbSpace::Jamo {
            out.push_str("mode jamo\n");
        }
        for (offset, keys) in &self.rows {
            let keys: Vec<String> = keys.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("row {} {}\n", offset, keys.join(" ")));
        }
        let mut aliases: Vec<(char, char)> = self.aliases.iter().map(|(a, b)| (*a, *b)).collect();
        aliases.sort();
        for (from, to) in aliases {
            out.push_str(&format!("alias {from} {to}\n"));
        }
        for (key, neighbors) in &self.adjacency {
            let ns: Vec<String> = neighbors.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("adjacency {} {}\n", key, ns.join(" ")));
        }
        out
    }
}

/// Derives neighbor sets from key rows: the horizontally adjacent keys on
/// the same row plus the two nearest keys (by horizontal distance between
/// key centers) on each adjacent row, symmetrized by union.
pub fn derive_adjacency(rows: &[(f64, Vec<char>)]) -> BTreeMap<char, BTreeSet<char>> {
    let mut adjacency: BTreeMap<char, BTreeSet<char>> = BTreeMap::new();
    let pos = |row: &(f64, Vec<char>), i: usize| row.0 + i as f64;

    for (r, row) in rows.iter().enumerate() {
        for (i, &key) in row.1.iter().enumerate() {
            let entry = adjacency.entry(key).or_default();
            if i > 0 {
                entry.insert(row.1[i - 1]);
            }
            if i + 1 < row.1.len() {
                entry.insert(row.1[i + 1]);
            }
            let x = pos(row, i);
            for other in [r.checked_sub(1), r.checked_add(1)] {
                let Some(other) = other.and_then(|o| rows.get(o)) else {
                    continue;
                };
                let mut candidates: Vec<(f64, usize)> = other
                    .1
                    .iter()
                    .enumerate()
                    .map(|(j, _)| ((pos(other, j) - x).abs(), j))
                    .collect();
                candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for &(_, j) in candidates.iter().take(2) {
                    entry.insert(other.1[j]);
                }
            }
        }
    }

    // Symmetrize: each derived edge becomes bidirectional.
    let edges: Vec<(char, char)> = adjacency
        .iter()
        .flat_map(|(&k, ns)| ns.iter().map(move |&n| (n, k)))
        .collect();
    for (k, n) in edges {
        adjacency.entry(k).or_default().insert(n);
    }
    adjacency
}

fn builtin_source(kind: LayoutKind) -> &'static str {
    match kind {
        LayoutKind::Qwerty => include_str!("../data/layouts/qwerty.layout"),
        LayoutKind::Qwertz => include_str!("../data/layouts/qwertz.layout"),
        LayoutKind::Azerty => include_str!("../data/layouts/azerty.layout"),
        LayoutKind::Dubeolsik => include_str!("../data/layouts/dubeolsik.layout"),
    }
}

/// Source-of-truth geometry for the builtin layout files. The committed
/// data files are rendered from these definitions; a golden test keeps them
/// in sync (`REGEN_LAYOUTS=1 cargo test -p noisekit layout_files` rewrites).
pub fn builtin_def(kind: LayoutKind) -> LayoutDef {
    let rows: Vec<(f64, Vec<char>)> = match kind {
        LayoutKind::Qwerty => vec![
            (0.0, "qwertyuiop".chars().collect()),
            (0.25, "asdfghjkl".chars().collect()),
            (0.75, "zxcvbnm".chars().collect()),
        ],
        LayoutKind::Qwertz => vec![
            (0.0, "qwertzuiopü".chars().collect()),
            (0.25, "asdfghjklöä".chars().collect()),
            (0.75, "yxcvbnm".chars().collect()),
        ],
        LayoutKind::Azerty => vec![
            (0.0, "azertyuiop".chars().collect()),
            (0.25, "qsdfghjklmù".chars().collect()),
            (0.75, "wxcvbn".chars().collect()),
        ],
        LayoutKind::Dubeolsik => vec![
            (0.0, "ㅂㅈㄷㄱㅅㅛㅕㅑㅐㅔ".chars().collect()),
            (0.25, "ㅁㄴㅇㄹㅎㅗㅓㅏㅣ".chars().collect()),
            (0.75, "ㅋㅌㅊㅍㅠㅜㅡ".chars().collect()),
        ],
    };
    let aliases: HashMap<char, char> = match kind {
        LayoutKind::Dubeolsik => [
            ('ㅃ', 'ㅂ'),
            ('ㅉ', 'ㅈ'),
            ('ㄸ', 'ㄷ'),
            ('ㄲ', 'ㄱ'),
            ('ㅆ', 'ㅅ'),
            ('ㅒ', 'ㅐ'),
            ('ㅖ', 'ㅔ'),
        ]
        .into_iter()
        .collect(),
        _ => HashMap::new(),
    };
    let adjacency = derive_adjacency(&rows);
    LayoutDef {
        id: kind.id().to_string(),
        version: 1,
        space: if kind == LayoutKind::Dubeolsik {
            PerturbSpace::Jamo
        } else {
            PerturbSpace::Chars
        },
        rows,
        aliases,
        adjacency,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qwerty_plausible_neighbors() {
        let layout = KeyboardLayout::builtin(LayoutKind::Qwerty);
        let g: BTreeSet<char> = layout.neighbors('g').unwrap().iter().copied().collect();
        assert_eq!(g, "fhtyvb".chars().collect::<BTreeSet<char>>());
        let q: BTreeSet<char> = layout.neighbors('q').unwrap().iter().copied().collect();
        assert_eq!(q, "was".chars().collect::<BTreeSet<char>>());
    }

    #[test]
    fn qwertz_z_is_next_to_t() {
        let layout = KeyboardLayout::builtin(LayoutKind::Qwertz);
        assert!(layout.neighbors('z').unwrap().contains(&'t'));
        // and y moved to the bottom row
        assert!(layout.neighbors('y').unwrap().contains(&'x'));
    }

    #[test]
    fn case_folds_for_lookup() {
        let layout = KeyboardLayout::builtin(LayoutKind::Qwerty);
        assert_eq!(layout.neighbors('Q'), layout.neighbors('q'));
        assert!(layout.neighbors('7').is_none());
    }

    #[test]
    fn dubeolsik_aliases_fold_to_base_key() {
        let layout = KeyboardLayout::builtin(LayoutKind::Dubeolsik);
        assert_eq!(layout.neighbors('ㅃ'), layout.neighbors('ㅂ'));
        assert_eq!(layout.neighbors('ㅆ'), layout.neighbors('ㅅ'));
        assert_eq!(layout.space, PerturbSpace::Jamo);
        // compound trailing jamo are not keys
        assert!(layout.neighbors('ㄺ').is_none());
    }

    #[test]
    fn builtin_layouts_validate() {
        for kind in LayoutKind::ALL {
            let layout = KeyboardLayout::builtin(kind);
            assert_eq!(layout.id, kind.id());
            assert_eq!(layout.checksum.len(), 64);
        }
    }

    #[test]
    fn derived_adjacency_is_symmetric_and_nonempty() {
        for kind in LayoutKind::ALL {
            let def = builtin_def(kind);
            for (k, ns) in &def.adjacency {
                assert!(!ns.is_empty());
                for n in ns {
                    assert!(def.adjacency[n].contains(k), "{kind}: {k}→{n} one-way");
                }
            }
        }
    }

    #[test]
    fn rejects_asymmetric_file() {
        let src = "id bad\nversion 1\nrow 0 a b c\nadjacency a b\nadjacency b a c\nadjacency c b\n";
        // a→b, b→a fine; b→c and c→b fine... make it actually asymmetric:
        let src_bad = src.replace("adjacency c b", "adjacency c a");
        let err = KeyboardLayout::parse(&src_bad, "test").unwrap_err();
        assert!(err.to_string().contains("not symmetric"), "{err}");
        KeyboardLayout::parse(src, "test").unwrap();
    }

    #[test]
    fn rejects_unknown_directive_and_multichar_keys() {
        assert!(KeyboardLayout::parse("id x\nversion 1\nbogus 1\n", "t").is_err());
        assert!(KeyboardLayout::parse("id x\nversion 1\nrow 0 ab c\n", "t").is_err());
    }

    #[test]
    fn layout_files_match_source_of_truth() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/layouts");
        for kind in LayoutKind::ALL {
            let rendered = builtin_def(kind).render();
            let path = dir.join(format!("{}.layout", kind.id()));
            if std::env::var_os("REGEN_LAYOUTS").is_some() {
                crate::fsutil::write_atomic(&path, rendered.as_bytes()).unwrap();
            } else {
                let on_disk = std::fs::read_to_string(&path).unwrap();
                assert_eq!(
                    on_disk, rendered,
                    "{kind} layout file is stale; rerun with REGEN_LAYOUTS=1"
                );
            }
        }
    }
}
