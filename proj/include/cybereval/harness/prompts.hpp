#pragma once

// Benchmark prompt templates and message rendering.
//
// Instruction text is reproduced byte for byte, including the trailing
// spaces at the end of wrapped lines. The task content follows the
// instruction after one blank line.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cybereval/error.hpp"
#include "cybereval/harness/dataset.hpp"

namespace cybereval::harness {

struct ChatMessage {
  std::string role;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

namespace templates {

inline constexpr std::string_view kMcqa =
    "Given the following question and four candidate answers (A, B, C, and D), \n"
    "choose the best answer. The last line of your response should be in the following \n"
    "format: 'Answer: $LETTER' (without quotes) where $LETTER is one of A, B, C, or D.";

inline constexpr std::string_view kRcm =
    "Analyze the following CVE description and map it to the most appropriate \n"
    "CWE. Provide a brief justification for your choice. Ensure the last line of \n"
    "your response contains only the CWE ID which should be of format `CWE ID: CWE-$id`.";

inline constexpr std::string_view kCwePrediction =
    "Analyze the following vulnerability description and map it to the most appropriate \n"
    "CWE. Provide a brief justification for your choice. Ensure the last line of \n"
    "your response contains only the CWE ID which should be of format `CWE ID: CWE-$id`.";

inline constexpr std::string_view kVsp =
    "From the following CVE description, determine the CVSS v3.1 vector string for \n"
    "each CVSS base metric: AV, AC, PR, UI, S, C, I, and A.\n"
    "\n"
    "Valid options for each metric are as follows:\n"
    " - Attack Vector (AV): Network (N), Adjacent (A), Local (L),\n"
    "   Physical (P)\n"
    " - Attack Complexity (AC): Low (L), High (H)\n"
    " - Privileges Required (PR): None (N), Low (L), High (H)\n"
    " - User Interaction (UI): None (N), Required (R)\n"
    " - Scope (S): Unchanged (U), Changed (C)\n"
    " - Confidentiality (C): None (N), Low (L), High (H)\n"
    " - Integrity (I): None (N), Low (L), High (H)\n"
    " - Availability (A): None (N), Low (L), High (H)\n"
    "\n"
    "Provide your answer as a CVSS v3.1 vector string in format:\n"
    "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H";

// "{{ platform }}" and the reference-list line are substituted per task.
inline constexpr std::string_view kAte =
    "Extract all MITRE {{ platform }} attack patterns from the following text and map \n"
    "them to their corresponding MITRE technique IDs. Provide reasoning for each \n"
    "identification.\n"
    "\n"
    "Important: Your response MUST end with a line in this exact format:\n"
    "Answer: T1234, T5678, T9012\n"
    "\n"
    "where you list only the main technique IDs (excluding subtechniques), separated \n"
    "by commas. This final line is mandatory.\n"
    "\n"
    "[Full list of MITRE technique IDs provided as reference]";

inline constexpr std::string_view kPlatformSlot = "{{ platform }}";
inline constexpr std::string_view kReferenceSlot =
    "[Full list of MITRE technique IDs provided as reference]";

}  // namespace templates

inline std::string_view instruction_template(TaskKind kind) {
  switch (kind) {
    case TaskKind::Mcqa: return templates::kMcqa;
    case TaskKind::Rcm: return templates::kRcm;
    case TaskKind::CwePrediction: return templates::kCwePrediction;
    case TaskKind::Vsp: return templates::kVsp;
    case TaskKind::Ate: return templates::kAte;
  }
  return {};
}

inline std::string render_user_prompt(const BenchmarkTask& task) {
  std::string out;
  switch (task.kind) {
    case TaskKind::Mcqa: {
      if (!task.options) throw MissingField("task '" + task.id + "': mcqa task has no options");
      out.append(templates::kMcqa);
      out.append("\n\nQuestion: ");
      out.append(task.question);
      out.append("\n");
      for (int k = 0; k < 4; ++k) {
        out.append("\n");
        out.push_back(static_cast<char>('A' + k));
        out.append(". ");
        out.append((*task.options)[k]);
      }
      return out;
    }
    case TaskKind::Ate: {
      if (!task.platform || task.platform->empty()) {
        throw MissingField("task '" + task.id + "': ate task has no platform");
      }
      std::string body(templates::kAte);
      body.replace(body.find(templates::kPlatformSlot), templates::kPlatformSlot.size(),
                   *task.platform);
      const std::size_t slot = body.find(templates::kReferenceSlot);
      if (task.reference_ids && !task.reference_ids->empty()) {
        std::string list = "Reference technique IDs: ";
        for (std::size_t k = 0; k < task.reference_ids->size(); ++k) {
          if (k > 0) list.append(", ");
          list.append((*task.reference_ids)[k]);
        }
        body.replace(slot, templates::kReferenceSlot.size(), list);
      } else {
        // Drop the placeholder along with the blank line before it.
        body.erase(slot - 2);
      }
      out = std::move(body);
      break;
    }
    default:
      out.append(instruction_template(task.kind));
      break;
  }
  out.append("\n\n");
  out.append(task.question);
  return out;
}

/// System message (when given) followed by the user message.
inline std::vector<ChatMessage> render_prompt(const BenchmarkTask& task,
                                              const std::optional<std::string>& system_prompt = {}) {
  std::vector<ChatMessage> messages;
  if (system_prompt && !system_prompt->empty()) messages.push_back({"system", *system_prompt});
  messages.push_back({"user", render_user_prompt(task)});
  return messages;
}

}  // namespace cybereval::harness
