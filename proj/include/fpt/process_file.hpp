#pragma once

// JSON interchange: one process, variable, step process or nested law per
// file. All rationals are strings ("p/q" or an integer).
//
//   {"version": 1, "timesteps": N,
//    "states": [{"label": "a", "payload": ["0", "1/2"]}, ...],
//    "atoms": [{"id": "w0", "prob": "1/3"}, ...],
//    "filtration": [[["w0", "w1"], ["w2"]], ...],      // N partitions
//    "process": {"w0": ["a", "b"], ...}                // N labels per atom
//  | "value": {"w0": "a", ...}                         // or a label list
//  }
//
// Step files add "events": ["0", "1/3", "1"], with one partition and one
// process/value entry per event. Law files carry
//   "law": {"rank": n, "encoding": "<hex of the canonical encoding>"}
// in place of atoms, filtration and process.

#include <optional>
#include <string>
#include <string_view>

#include "fpt/prediction.hpp"
#include "fpt/timegrid.hpp"

namespace fpt {

enum class FileKind { kProcess, kVariable, kStepProcess, kLaw };

struct ProcessFile {
  FileKind kind = FileKind::kProcess;
  std::shared_ptr<const StateSpace> states;
  std::size_t timesteps = 0;
  std::optional<FilteredProcess> process;
  std::optional<FilteredRandomVariable> variable;
  std::optional<StepFilteredProcess> step;
  std::optional<NestedLaw> law;

  // The discrete-time content as a filtered random variable. Throws
  // kInvalidFile for step and law files.
  [[nodiscard]] FilteredRandomVariable frv() const;
};

// Throws kInvalidFile on malformed JSON or schema violations; module
// invariants raise their own codes.
ProcessFile parse_process_file(std::string_view text);
ProcessFile load_process_file(const std::string& path);

std::string emit(const FilteredProcess& x);
// Level-0 variables only.
std::string emit(const FilteredRandomVariable& x);
std::string emit(const StepFilteredProcess& x);
std::string emit(const NestedLaw& law, const StateSpace& states, std::size_t timesteps);

}  // namespace fpt
