use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::Verbosity;
use crate::corpus::{Category, Label};
use crate::cot::{serialize, AnswerSection, CoTDocument, ThinkSection, Verdict, Which};

/// Think-length range (words, inclusive) rewarded for normal verdicts.
pub const NORMAL_LENGTH_RANGE: (usize, usize) = (140, 261);
/// Think-length range (words, inclusive) rewarded for abnormal verdicts.
pub const ABNORMAL_LENGTH_RANGE: (usize, usize) = (233, 456);

/// Think word count produced for each class and verbosity: below the class
/// range, inside it, and above it.
pub fn target_words(class: Label, verbosity: Verbosity) -> usize {
    const NORMAL: [usize; 3] = [96, 200, 320];
    const ABNORMAL: [usize; 3] = [160, 344, 520];
    match class {
        Label::Normal => NORMAL[verbosity.index()],
        Label::Abnormal => ABNORMAL[verbosity.index()],
    }
}

const SCENE: &[&str] = &[
    "The camera stays fixed and the lighting is stable for the whole clip.",
    "Several people and objects move through the frame at a steady pace.",
    "The background layout is consistent from the first frame to the last.",
    "Nothing blocks the view and the scene remains clearly visible.",
    "The overall activity level matches what is expected for this place.",
];

const LOCAL: &[&str] = &[
    "The event is concentrated in a limited part of the timeline.",
    "Frames outside this span look like the ordinary background.",
    "The change in appearance is sudden rather than gradual.",
    "The objects involved differ clearly from the surrounding activity.",
];

const SHALLOW: &[&str] = &[
    "The visual cues inside the span break the normal pattern of the scene.",
    "Such behaviour is rarely seen in this setting.",
    "The contrast with the rest of the clip supports this judgement.",
];

const DEEP: &[&str] = &[
    "The event violates common expectations about safety in public places.",
    "A quick response would limit the damage that follows from it.",
    "The surrounding people are likely to be affected by what happens.",
    "Recording the exact time of the event helps any later investigation.",
];

const NORMAL_PERCEPTION: &[&str] = &[
    "The camera stays fixed and the lighting is stable for the whole clip.",
    "People and vehicles follow their usual paths through the frame.",
    "The background layout is consistent from the first frame to the last.",
    "No object enters the scene in an unexpected way.",
];

const NORMAL_COGNITION: &[&str] = &[
    "Every observed action fits the ordinary use of this place.",
    "There is no sign of danger, damage or conflict.",
    "The clip therefore contains only regular activity.",
];

fn why(category: Option<Category>) -> &'static str {
    match category {
        Some(Category::Fighting) => "people are attacking each other physically",
        Some(Category::Robbery) => "property is being taken from someone by force",
        Some(Category::Shooting) => "a firearm is being used against others",
        Some(Category::Fire) => "flames and smoke are spreading without control",
        Some(Category::Flood) => "water is covering ground that should be dry",
        Some(Category::TrafficAccident) => "vehicles collide instead of passing safely",
        None => "the activity departs sharply from the normal pattern",
    }
}

fn how(category: Option<Category>) -> &'static str {
    match category {
        Some(Category::Fighting) => "people may be injured and the conflict may spread",
        Some(Category::Robbery) => "the victim may lose property or be harmed",
        Some(Category::Shooting) => "there is an immediate risk of serious injury",
        Some(Category::Fire) => "the fire may damage buildings and endanger people",
        Some(Category::Flood) => "the water may damage property and block movement",
        Some(Category::TrafficAccident) => "passengers may be hurt and traffic blocked",
        None => "the situation may require attention from staff",
    }
}

/// Exactly `target` words: `lead` followed by `bank` cycled, ending in a
/// full stop.
fn compose(lead: &str, bank: &[&str], target: usize) -> String {
    let mut words: Vec<&str> = Vec::with_capacity(target);
    words.extend(lead.split_whitespace().take(target));
    let mut i = 0;
    while words.len() < target {
        for w in bank[i % bank.len()].split_whitespace() {
            if words.len() == target {
                break;
            }
            words.push(w);
        }
        i += 1;
    }
    let mut out = words.join(" ");
    if !out.ends_with('.') {
        out.push('.');
    }
    out
}

fn split_words(total: usize, parts: usize) -> Vec<usize> {
    (0..parts)
        .map(|i| total / parts + usize::from(i < total % parts))
        .collect()
}

fn document(verdict: &Verdict, verbosity: Verbosity) -> CoTDocument {
    let total = target_words(verdict.prediction(), verbosity);
    match verdict {
        Verdict::Normal => {
            let n = split_words(total, 2);
            let think = ThinkSection::Simplified {
                perception: compose(
                    "The video shows an ordinary scene with regular activity throughout.",
                    NORMAL_PERCEPTION,
                    n[0],
                ),
                cognition: compose(
                    "Nothing in the clip departs from the established normal pattern.",
                    NORMAL_COGNITION,
                    n[1],
                ),
            };
            let answer = AnswerSection {
                which: Which::Normal,
                what: "The video shows routine activity without any abnormal event.".into(),
                when: None,
                where_: None,
                why: None,
                how: None,
            };
            CoTDocument::new(think, answer).expect("normal template is valid")
        }
        Verdict::Abnormal { interval, category } => {
            let n = split_words(total, 4);
            let phrase = category.map_or("an unusual event", |c| c.phrase());
            let (s, e) = (interval.start(), interval.end());
            let think = ThinkSection::Full {
                global_perception: compose(
                    "The video shows a monitored scene with ordinary background activity.",
                    SCENE,
                    n[0],
                ),
                local_perception: compose(
                    &format!("From frame {s} to frame {e} the scene changes and {phrase} appears."),
                    LOCAL,
                    n[1],
                ),
                shallow_cognition: compose(
                    &format!("This is abnormal because {}.", why(*category)),
                    SHALLOW,
                    n[2],
                ),
                deep_cognition: compose(
                    &format!("The likely consequence is that {}.", how(*category)),
                    DEEP,
                    n[3],
                ),
            };
            let which = match category {
                Some(c) => Which::Known(*c),
                None => Which::Unknown("Anomaly".into()),
            };
            let answer = AnswerSection {
                which,
                what: format!("The video shows {phrase} between frames {s} and {e}."),
                when: Some(*interval),
                where_: Some("In the part of the frame where the activity is concentrated.".into()),
                why: Some(format!("It is abnormal because {}.", why(*category))),
                how: Some(format!("As a result {}.", how(*category))),
            };
            CoTDocument::new(think, answer).expect("abnormal template is valid")
        }
    }
}

/// Template rendering of a verdict. A malformed completion is the canonical
/// text with its closing `</answer>` dropped, and carries no document.
pub fn render(verdict: &Verdict, verbosity: Verbosity, wellformed: bool) -> (String, Option<CoTDocument>) {
    let doc = document(verdict, verbosity);
    let mut text = serialize(&doc);
    if wellformed {
        (text, Some(doc))
    } else {
        let cut = text.rfind("</answer>").expect("serialized answer");
        text.truncate(cut);
        (text, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TemporalInterval;
    use crate::cot::{think_word_count, validate_format};

    fn verdicts() -> [Verdict; 3] {
        [
            Verdict::Normal,
            Verdict::Abnormal {
                interval: TemporalInterval::new(4, 10).unwrap(),
                category: Some(Category::Fire),
            },
            Verdict::Abnormal {
                interval: TemporalInterval::new(0, 2).unwrap(),
                category: None,
            },
        ]
    }

    #[test]
    fn word_counts_land_on_the_declared_side() {
        for v in verdicts() {
            let (lo, hi) = match v.prediction() {
                Label::Normal => NORMAL_LENGTH_RANGE,
                Label::Abnormal => ABNORMAL_LENGTH_RANGE,
            };
            for verbosity in Verbosity::ALL {
                let (text, doc) = render(&v, verbosity, true);
                let words = think_word_count(doc.as_ref().unwrap());
                assert_eq!(words, target_words(v.prediction(), verbosity));
                match verbosity {
                    Verbosity::Short => assert!(words < lo),
                    Verbosity::Medium => assert!((lo..=hi).contains(&words)),
                    Verbosity::Long => assert!(words > hi),
                }
                assert!(validate_format(&text).valid);
            }
        }
    }

    #[test]
    fn normal_medium_in_range() {
        let (text, doc) = render(&Verdict::Normal, Verbosity::Medium, true);
        assert!(validate_format(&text).valid);
        assert!((140..=261).contains(&think_word_count(&doc.unwrap())));
    }

    #[test]
    fn malformed_drops_answer_close() {
        for v in verdicts() {
            let (text, doc) = render(&v, Verbosity::Medium, false);
            assert!(doc.is_none());
            assert!(!text.contains("</answer>"));
            assert!(!validate_format(&text).valid);
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        for v in verdicts() {
            assert_eq!(render(&v, Verbosity::Long, true), render(&v, Verbosity::Long, true));
        }
    }

    #[test]
    fn verdict_survives_rendering() {
        for v in verdicts() {
            let (text, _) = render(&v, Verbosity::Short, true);
            let back = crate::cot::extract_verdict(&text).unwrap();
            assert_eq!(back.prediction(), v.prediction());
            assert_eq!(back.interval(), v.interval());
        }
    }
}
