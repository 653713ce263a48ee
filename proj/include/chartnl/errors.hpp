#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace chartnl {

/// Base for every domain error raised by the library. Carries a stable kind
/// name (used by the CLI and by the pipeline when it annotates failures) and
/// an optional list of context frames such as "chart=c1" or "stage=question".
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }
    const std::vector<std::string>& context() const noexcept { return context_; }

    void add_context(std::string frame) { context_.push_back(std::move(frame)); }

    bool has_context(const std::string& frame) const {
        for (const auto& c : context_)
            if (c == frame) return true;
        return false;
    }

    std::string describe() const {
        std::string out = kind_ + ": " + what();
        for (const auto& c : context_) out += " [" + c + "]";
        return out;
    }

private:
    std::string kind_;
    std::vector<std::string> context_;
};

#define CHARTNL_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                           \
    public:                                                               \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    };

// spec_model
class ParseError : public Error {
public:
    ParseError(std::size_t position, const std::string& message)
        : Error("ParseError", "at byte " + std::to_string(position) + ": " + message),
          position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};
CHARTNL_DEFINE_ERROR(DuplicateKeyError)
CHARTNL_DEFINE_ERROR(NoMarkError)

// corpus
CHARTNL_DEFINE_ERROR(SizeLimitError)
CHARTNL_DEFINE_ERROR(EmptyCorpusError)
CHARTNL_DEFINE_ERROR(SampleSizeError)

// preprocess / io
CHARTNL_DEFINE_ERROR(IoError)
CHARTNL_DEFINE_ERROR(HeterogeneousDataError)

// fielddata
CHARTNL_DEFINE_ERROR(UnknownFieldError)
CHARTNL_DEFINE_ERROR(TypeError)
CHARTNL_DEFINE_ERROR(EmptyInputError)

// promptforge
CHARTNL_DEFINE_ERROR(MissingStageInputError)
CHARTNL_DEFINE_ERROR(InvalidScoreError)
CHARTNL_DEFINE_ERROR(DuplicateAxisError)
CHARTNL_DEFINE_ERROR(TemplateError)

// llm_gateway
CHARTNL_DEFINE_ERROR(AuthError)
CHARTNL_DEFINE_ERROR(RateLimitExhausted)
CHARTNL_DEFINE_ERROR(TimeoutError)
CHARTNL_DEFINE_ERROR(MalformedResponseError)
CHARTNL_DEFINE_ERROR(HttpError)
CHARTNL_DEFINE_ERROR(MissingStepError)
CHARTNL_DEFINE_ERROR(EmptyStepError)

// pipeline
CHARTNL_DEFINE_ERROR(SchemaError)
CHARTNL_DEFINE_ERROR(ProvenanceError)
CHARTNL_DEFINE_ERROR(PoolExhaustedError)

// diversity / qualcoding
CHARTNL_DEFINE_ERROR(DimensionMismatchError)
CHARTNL_DEFINE_ERROR(ZeroVectorError)
CHARTNL_DEFINE_ERROR(TooFewPointsError)
CHARTNL_DEFINE_ERROR(ZeroDimensionError)
CHARTNL_DEFINE_ERROR(EmptySetError)
CHARTNL_DEFINE_ERROR(TooFewCodesError)
CHARTNL_DEFINE_ERROR(ProviderError)

// configuration
CHARTNL_DEFINE_ERROR(ConfigError)

#undef CHARTNL_DEFINE_ERROR

}  // namespace chartnl
