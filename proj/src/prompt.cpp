#include "mlceval/prompt.hpp"

#include <fstream>

#include "json.hpp"

namespace mlceval {

using ojson = nlohmann::ordered_json;

namespace {

const char* kZeroSystem =
    "You are a careful clinical text annotator. You classify psychiatric "
    "evaluation notes for the presence of the following factors: {{labels}}.";

const char* kZeroUser =
    "Decide, for each factor below, whether the note documents it for the patient.\n"
    "\n"
    "Factors, in order:\n"
    "{{definitions}}\n"
    "\n"
    "{{format_instruction}}\n"
    "\n"
    "Note:\n"
    "{{note}}";

const char* kGuideUser =
    "Decide, for each factor below, whether the note documents it for the patient.\n"
    "\n"
    "Factors, in order:\n"
    "{{definitions}}\n"
    "\n"
    "Annotation guideline:\n"
    "{{guideline}}\n"
    "\n"
    "{{format_instruction}}\n"
    "\n"
    "Note:\n"
    "{{note}}";

const char* kDefaultGuideline =
    "- Mark a factor present when the note states it for the patient, whether "
    "current or historical.\n"
    "- Explicit denials (e.g. the patient denies such thoughts) do not count as "
    "presence.\n"
    "- Events experienced by family members, friends or acquaintances belong to "
    "exposure, not to the patient's own ideation or attempts.\n"
    "- Self-harm without intent to die belongs to non-suicidal self-injury even "
    "when it co-occurs with suicidal thinking.\n"
    "- When the note is ambiguous about intent to die, prefer ideation over "
    "attempt.";

std::map<std::string, std::string> default_definitions() {
    return {
        {"SI", "thoughts of ending one's own life, current or historical"},
        {"SA", "a non-fatal self-directed act carried out with intent to die"},
        {"ES", "suicidal ideation, attempts or death among people close to the patient"},
        {"NSSI", "deliberate self-harm, or thoughts of self-harm, without intent to die"},
    };
}

std::string replace_all(std::string text, std::string_view token, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
    }
    return text;
}

std::string format_instruction(const LabelSchema& schema) {
    std::string order;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (i > 0) order += '-';
        order += schema.label(i);
    }
    std::string example;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (i > 0) example += '-';
        example += (i == 0) ? '1' : '0';
    }
    return "Answer with exactly " + std::to_string(schema.size()) +
           " binary digits separated by dashes, in the order " + order +
           ". Use 1 for present and 0 for absent. Output only the code, e.g. " + example +
           ".";
}

}  // namespace

PromptTemplate PromptTemplate::zero_default() {
    PromptTemplate t;
    t.id = Id::zero;
    t.system_text = kZeroSystem;
    t.user_text = kZeroUser;
    t.definitions = default_definitions();
    return t;
}

PromptTemplate PromptTemplate::guide_default() {
    PromptTemplate t;
    t.id = Id::guide;
    t.system_text = kZeroSystem;
    t.user_text = kGuideUser;
    t.guideline = kDefaultGuideline;
    t.definitions = default_definitions();
    return t;
}

PromptTemplate PromptTemplate::load(std::istream& in) {
    ojson doc;
    try {
        doc = ojson::parse(in);
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid template document: ") + e.what());
    }
    PromptTemplate t;
    const std::string id = doc.value("id", "custom");
    if (id == "zero") t.id = Id::zero;
    else if (id == "guide") t.id = Id::guide;
    else t.id = Id::custom;
    t.system_text = doc.value("system", "");
    t.user_text = doc.value("user", "");
    t.guideline = doc.value("guideline", "");
    if (doc.contains("definitions"))
        for (const auto& [name, v] : doc["definitions"].items())
            t.definitions[name] = v.get<std::string>();
    if (t.system_text.empty() || t.user_text.empty())
        throw ValidationError("template must define non-empty \"system\" and \"user\" text");
    return t;
}

PromptTemplate PromptTemplate::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open template file \"" + path + "\"");
    return load(in);
}

std::string PromptTemplate::id_string() const {
    switch (id) {
        case Id::zero: return "zero";
        case Id::guide: return "guide";
        case Id::custom: return "custom";
    }
    return "custom";
}

std::vector<ChatMessage> render_prompt(const PromptTemplate& tmpl, const LabelSchema& schema,
                                       std::string_view note) {
    if (note.empty()) throw ValidationError("cannot render a prompt for an empty note");

    std::string labels;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (i > 0) labels += ", ";
        labels += schema.label(i);
    }
    std::string definitions;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (i > 0) definitions += '\n';
        definitions += "- " + schema.label(i);
        auto it = tmpl.definitions.find(schema.label(i));
        if (it != tmpl.definitions.end() && !it->second.empty())
            definitions += ": " + it->second;
    }

    auto render = [&](std::string text) {
        text = replace_all(std::move(text), "{{labels}}", labels);
        text = replace_all(std::move(text), "{{definitions}}", definitions);
        text = replace_all(std::move(text), "{{format_instruction}}", format_instruction(schema));
        text = replace_all(std::move(text), "{{guideline}}", tmpl.guideline);
        text = replace_all(std::move(text), "{{note}}", note);
        const std::size_t open = text.find("{{");
        if (open != std::string::npos) {
            const std::size_t close = text.find("}}", open);
            throw ValidationError("unknown placeholder \"" +
                                  text.substr(open, close == std::string::npos
                                                        ? std::string::npos
                                                        : close - open + 2) +
                                  "\" in template");
        }
        return text;
    };

    std::vector<ChatMessage> messages;
    messages.push_back(ChatMessage{"system", render(tmpl.system_text)});
    messages.push_back(ChatMessage{"user", render(tmpl.user_text)});
    for (const auto& msg : messages)
        if (msg.content.empty())
            throw ValidationError("rendered " + msg.role + " message is empty");
    return messages;
}

}  // namespace mlceval
