use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const ITEM_A_PLACEHOLDER: &str = "{item_a}";
pub const ITEM_B_PLACEHOLDER: &str = "{item_b}";

/// Default pairwise prompt. Asks for a single number on a 0–1 scale.
pub const DEFAULT_TEMPLATE: &str = "How similar are the smells of \"{item_a}\" and \"{item_b}\"? \
Rate the similarity on a scale from 0 to 1, where 0 means the two odors are completely \
different and 1 means they smell identical. Respond with only a single decimal number.";

/// Checks that `template` contains each placeholder exactly once.
pub fn validate_template(template: &str) -> Result<()> {
    for placeholder in [ITEM_A_PLACEHOLDER, ITEM_B_PLACEHOLDER] {
        match template.matches(placeholder).count() {
            1 => {}
            0 => return Err(Error::Template(format!("missing placeholder {placeholder}"))),
            n => {
                return Err(Error::Template(format!(
                    "placeholder {placeholder} appears {n} times"
                )))
            }
        }
    }
    Ok(())
}

pub fn render_prompt(item_a: &str, item_b: &str, template: &str) -> Result<String> {
    validate_template(template)?;
    // Split on the first placeholder so a label containing the other
    // placeholder text is not substituted twice.
    let (first, first_value, second, second_value) =
        match (template.find(ITEM_A_PLACEHOLDER), template.find(ITEM_B_PLACEHOLDER)) {
            (Some(a), Some(b)) if a < b => (ITEM_A_PLACEHOLDER, item_a, ITEM_B_PLACEHOLDER, item_b),
            _ => (ITEM_B_PLACEHOLDER, item_b, ITEM_A_PLACEHOLDER, item_a),
        };
    let (head, rest) = template.split_once(first).expect("validated");
    let (middle, tail) = rest.split_once(second).expect("validated");
    Ok(format!("{head}{first_value}{middle}{second_value}{tail}"))
}

/// Hex SHA-256 of the rendered prompt text.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_template_names_both_items_once() {
        let p = render_prompt("cis-3-hexenol", "beta-ionone", DEFAULT_TEMPLATE).unwrap();
        assert_eq!(p.matches("cis-3-hexenol").count(), 1);
        assert_eq!(p.matches("beta-ionone").count(), 1);
        assert!(p.contains("0 to 1"));
        assert_eq!(p, render_prompt("cis-3-hexenol", "beta-ionone", DEFAULT_TEMPLATE).unwrap());
    }

    #[test]
    fn self_pair_is_allowed() {
        let p = render_prompt("rose", "rose", DEFAULT_TEMPLATE).unwrap();
        assert_eq!(p.matches("rose").count(), 2);
    }

    #[test]
    fn bad_templates() {
        assert!(render_prompt("a", "b", "compare {item_a} only").is_err());
        assert!(render_prompt("a", "b", "{item_a} {item_b} {item_b}").is_err());
    }

    #[test]
    fn placeholder_order_and_hostile_labels() {
        assert_eq!(render_prompt("x", "y", "{item_b} then {item_a}").unwrap(), "y then x");
        assert_eq!(
            render_prompt("{item_b}", "z", "{item_a}/{item_b}").unwrap(),
            "{item_b}/z"
        );
    }

    #[test]
    fn hash_is_stable_hex() {
        let h = prompt_hash("abc");
        assert_eq!(h, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
