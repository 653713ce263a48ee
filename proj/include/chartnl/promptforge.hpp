#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace chartnl {

enum class PromptTask {
    L1,
    L2Feature,
    L2Answer,
    L2Caption,
    UtteranceInstr,
    UtteranceCombine,
    Question,
    Coding,
    Paraphrase1,
    Paraphrase2,
};

std::string_view to_string(PromptTask t);

struct RenderedPrompt {
    PromptTask task = PromptTask::L1;
    std::string text;
    /// Placeholder name (without braces) to the substituted value.
    std::map<std::string, std::string> substitutions;
};

/// Raw template text for a task, without the trailing newline of the file.
std::string_view prompt_template(PromptTask t);

/// Placeholder names in order of first appearance. A placeholder is `{name}`
/// where name starts with a letter and holds letters, digits, '_', '-' or ' '.
std::vector<std::string> template_placeholders(std::string_view tmpl);

/// Single-pass substitution: substituted values are never rescanned. Throws
/// TemplateError when a placeholder has no value or a value names no placeholder.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

RenderedPrompt build_l1_prompt(std::string_view minified_spec, std::string_view ftt);

enum class L2Stage { Feature, Answer, Caption };

/// `stage_input` is the question for the answer stage and the collected
/// information for the caption stage; it is ignored by the feature stage.
RenderedPrompt build_l2_prompt(L2Stage stage, std::string_view minified_spec, std::string_view ftt,
                               std::string_view stage_input = {});

enum class UtteranceStage { Instructions, Combine };

/// `inst_first_concat` is the instruction list from the instructions stage.
RenderedPrompt build_utterance_prompt(UtteranceStage stage, std::string_view minified_spec, std::string_view ftt,
                                      std::string_view inst_first_concat = {});

RenderedPrompt build_question_prompt(std::string_view minified_spec);
RenderedPrompt build_coding_prompt(std::string_view sentence);

enum class AxisName { Formality, Clarity, Expertise, Subjectivity };

inline constexpr std::array<AxisName, 4> kAllAxes = {AxisName::Formality, AxisName::Clarity, AxisName::Expertise,
                                                     AxisName::Subjectivity};

struct LanguageAxis {
    AxisName name = AxisName::Formality;
    std::string direction_low;
    std::string direction_high;
    std::string description;
};

std::string_view to_string(AxisName a);
AxisName axis_from_string(std::string_view s);

/// The four axes, loaded from the embedded axis resource.
const LanguageAxis& language_axis(AxisName a);

struct ParaphraseSpec {
    std::vector<AxisName> axes;
    std::vector<int> scores;

    friend bool operator==(const ParaphraseSpec&, const ParaphraseSpec&) = default;
};

/// Throws InvalidScoreError or DuplicateAxisError.
void validate(const ParaphraseSpec& spec);

/// Compact label such as "Formality=3" or "Formality=1,Expertise=5".
std::string describe(const ParaphraseSpec& spec);

RenderedPrompt build_paraphrase_prompt(std::string_view sentence, const ParaphraseSpec& spec);

enum class ParaphraseMode { OneAxis, TwoAxes };

std::string_view to_string(ParaphraseMode m);
ParaphraseMode paraphrase_mode_from_string(std::string_view s);

/// 20 single-axis or 150 two-axis specs, ordered by axis then ascending scores.
std::vector<ParaphraseSpec> enumerate_paraphrase_variants(ParaphraseMode mode);

}  // namespace chartnl
