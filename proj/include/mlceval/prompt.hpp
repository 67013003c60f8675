#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mlceval/labelspace.hpp"

namespace mlceval {

struct ChatMessage {
    std::string role;
    std::string content;
};

// Chat prompt template. The user text carries placeholders, substituted at
// render time:
//   {{labels}}              label names in schema order
//   {{definitions}}         one line per label with its definition
//   {{format_instruction}}  generated output contract (always demands exactly
//                           L dash-separated binary digits in schema order)
//   {{guideline}}           the guideline block (guide templates)
//   {{note}}                the document body
//
// The built-in zero and guide templates are editable reconstructions; load()
// reads the same structure from a JSON file for custom prompts.
class PromptTemplate {
public:
    enum class Id { zero, guide, custom };

    static PromptTemplate zero_default();
    static PromptTemplate guide_default();
    static PromptTemplate load(std::istream& in);
    static PromptTemplate load_file(const std::string& path);

    Id id = Id::custom;
    std::string system_text;
    std::string user_text;
    std::string guideline;
    std::map<std::string, std::string> definitions;  // label -> definition

    std::string id_string() const;
};

std::vector<ChatMessage> render_prompt(const PromptTemplate& tmpl, const LabelSchema& schema,
                                       std::string_view note);

}  // namespace mlceval
