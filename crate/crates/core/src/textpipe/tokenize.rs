// SPDX-License-Identifier: Apache-2.0

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_joiner(c: char) -> bool {
    c == '-' || c == '\''
}

/// Lowercases `raw` and splits it into words.
///
/// Letters and digits form words. A hyphen or apostrophe survives only
/// between two word characters (`it's`, `blue-green`); all other characters
/// separate words. Typographic apostrophes are folded to `'`.
pub fn tokenize(raw: &str) -> Vec<String> {
    let chars: Vec<char> = raw
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| match c {
            '\u{2019}' | '\u{2018}' | '\u{02bc}' => '\'',
            other => other,
        })
        .collect();

    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let joins = is_joiner(c) && !current.is_empty() && chars.get(i + 1).copied().is_some_and(is_word_char);
        if is_word_char(c) || joins {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_split() {
        assert_eq!(tokenize("A calm shell"), ["a", "calm", "shell"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize(" \t\n ").is_empty());
    }

    #[test]
    fn punctuation_rules() {
        assert_eq!(tokenize("it's a chair, sitting!"), ["it's", "a", "chair", "sitting"]);
        assert_eq!(
            tokenize("blue-green -dash- 'quoted' dogs'"),
            ["blue-green", "dash", "quoted", "dogs"]
        );
        assert_eq!(tokenize("it\u{2019}s"), ["it's"]);
        assert_eq!(tokenize("a--b"), ["a", "b"]);
        assert_eq!(tokenize("Sea-Urchin...PLANT?"), ["sea-urchin", "plant"]);
    }
}
