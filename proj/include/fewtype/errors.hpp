#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fewtype {

// Coarse classification used by the CLI to pick a process exit code.
enum class ErrorKind { config, data, numeric, other };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct MalformedLineError : Error {
    std::size_t line_no;
    explicit MalformedLineError(std::size_t line, const std::string& detail)
        : Error(ErrorKind::data, "malformed line " + std::to_string(line) + ": " + detail),
          line_no(line) {}
};

struct EmptyCorpusError : Error {
    explicit EmptyCorpusError(const std::string& detail = "corpus contains no sentences")
        : Error(ErrorKind::data, detail) {}
};

struct InsufficientInstancesError : Error {
    std::string label;
    std::size_t have;
    std::size_t need;
    InsufficientInstancesError(std::string lbl, std::size_t h, std::size_t n)
        : Error(ErrorKind::data, "label '" + lbl + "' has " + std::to_string(h) +
                                     " usable instances, need " + std::to_string(n)),
          label(std::move(lbl)), have(h), need(n) {}
};

struct InsufficientLabelsError : Error {
    std::size_t have;
    std::size_t need;
    InsufficientLabelsError(std::size_t h, std::size_t n)
        : Error(ErrorKind::data, "corpus provides " + std::to_string(h) +
                                     " labels, sampler needs " + std::to_string(n)),
          have(h), need(n) {}
};

struct CountMismatchError : Error {
    std::string label;
    std::size_t have;
    std::size_t need;
    CountMismatchError(std::string lbl, std::size_t h, std::size_t n)
        : Error(ErrorKind::data, "support set has " + std::to_string(h) + " instances of '" +
                                     lbl + "', expected " + std::to_string(n)),
          label(std::move(lbl)), have(h), need(n) {}
};

struct BadTemplateError : Error {
    explicit BadTemplateError(const std::string& detail)
        : Error(ErrorKind::config, "bad template: " + detail) {}
};

struct MentionTooLongError : Error {
    explicit MentionTooLongError(const std::string& detail)
        : Error(ErrorKind::data, "mention too long: " + detail) {}
};

struct UnknownWordError : Error {
    std::string word;
    explicit UnknownWordError(std::string w)
        : Error(ErrorKind::data, "verbalizer word '" + w + "' is not a single vocabulary item"),
          word(std::move(w)) {}
};

struct UnknownLabelError : Error {
    std::string label;
    explicit UnknownLabelError(std::string lbl)
        : Error(ErrorKind::data, "label '" + lbl + "' is not in the active label set"),
          label(std::move(lbl)) {}
};

struct DimensionMismatchError : Error {
    explicit DimensionMismatchError(const std::string& detail)
        : Error(ErrorKind::data, "dimension mismatch: " + detail) {}
};

struct SequenceTooLongError : Error {
    std::size_t length;
    std::size_t limit;
    SequenceTooLongError(std::size_t len, std::size_t lim)
        : Error(ErrorKind::data, "sequence of " + std::to_string(len) +
                                     " tokens exceeds max_seq_len " + std::to_string(lim)),
          length(len), limit(lim) {}
};

struct NonFiniteLossError : Error {
    explicit NonFiniteLossError(const std::string& detail = "loss or gradient is not finite")
        : Error(ErrorKind::numeric, detail) {}
};

struct InvalidDistributionError : Error {
    explicit InvalidDistributionError(const std::string& detail)
        : Error(ErrorKind::data, "invalid distribution: " + detail) {}
};

struct TaskStreamExhaustedError : Error {
    explicit TaskStreamExhaustedError()
        : Error(ErrorKind::data, "task stream exhausted before meta-training finished") {}
};

struct BadPatternError : Error {
    std::size_t line_no;
    BadPatternError(std::size_t line, const std::string& detail)
        : Error(ErrorKind::data, "bad pattern rule at line " + std::to_string(line) + ": " + detail),
          line_no(line) {}
};

struct DuplicatePriorityError : Error {
    int priority;
    explicit DuplicatePriorityError(int prio)
        : Error(ErrorKind::data, "duplicate rule priority " + std::to_string(prio)),
          priority(prio) {}
};

struct AlignmentMismatchError : Error {
    explicit AlignmentMismatchError(const std::string& detail)
        : Error(ErrorKind::data, "prediction/gold alignment mismatch: " + detail) {}
};

struct EmptyEvaluationError : Error {
    explicit EmptyEvaluationError() : Error(ErrorKind::data, "nothing to evaluate") {}
};

struct UnsupportedFormatError : Error {
    explicit UnsupportedFormatError(const std::string& fmt)
        : Error(ErrorKind::config, "unsupported report format '" + fmt + "'") {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& detail) : Error(ErrorKind::config, detail) {}
};

struct PathNotFoundError : Error {
    std::string path;
    explicit PathNotFoundError(std::string p)
        : Error(ErrorKind::config, "path not found: " + p), path(std::move(p)) {}
};

struct BackendProtocolError : Error {
    explicit BackendProtocolError(const std::string& detail)
        : Error(ErrorKind::other, "backend protocol error: " + detail) {}
};

}  // namespace fewtype
