#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hgd/error.hpp"

namespace hgd::cli {

enum class Subcommand { Stats, Validate, Synth, ExtractCheck, Train, CompareModels, CompareEmbeddings, Cosine };

std::string_view to_string(Subcommand s);

/// One accepted flag of a subcommand.
struct FlagSpec {
    std::string name;  // including leading "--"
    bool required = false;
    bool is_switch = false;
    std::string default_value;
    std::string help;
};

struct SubcommandSpec {
    Subcommand id;
    std::string name;
    std::string help;
    std::vector<FlagSpec> flags;
};

/// Every subcommand with its flags, in declaration order.
const std::vector<SubcommandSpec>& command_table();

/// A validated invocation. `flags` holds every flag of the subcommand, with
/// defaults filled in; switches are "true"/"false".
struct Command {
    Subcommand subcommand = Subcommand::Stats;
    std::map<std::string, std::string> flags;

    const std::string& get(const std::string& name) const;
    bool has(const std::string& name) const { return flags.contains(name); }
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public Error {
public:
    using Error::Error;
};

/// `--help` was requested; what() is the help text.
class HelpRequested : public Error {
public:
    using Error::Error;
};

/// Parses argv without the program name. Throws UsageError or HelpRequested.
Command parse_args(std::span<const std::string> args);

/// Full help text of one subcommand (or the top level when empty).
std::string help_text(std::string_view subcommand = {});

/// Runs a parsed command. Diagnostics go to `err` as single lines; returns
/// kExitOk or kExitRuntime.
int execute(const Command& c, std::ostream& out, std::ostream& err);

/// Histogram companion of a cosine output path: "cos.csv" -> "cos.hist.csv".
std::filesystem::path histogram_path(const std::filesystem::path& out);

/// parse_args + execute with the exit-code contract applied.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace hgd::cli
