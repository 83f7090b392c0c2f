#ifndef NEURACRYPT_ERRORS_HPP
#define NEURACRYPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace neuracrypt {

enum class errc {
  // discrete / analyzer
  duplicate_image,
  unknown_sample,
  length_mismatch,
  too_large,
  not_in_family,
  inconsistent_observation,
  zero_evidence,
  instance_mismatch,
  invalid_instance,
  invalid_prior,
  // encoder / tensor
  invalid_arch,
  shape_mismatch,
  non_finite_output,
  format_error,
  version_error,
  // attacks
  dim_mismatch,
  empty_set,
  unsupported_model,
  divergence,
  single_class_data,
  // io
  missing_label,
  vocab_mismatch,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::duplicate_image: return "DuplicateImage";
    case errc::unknown_sample: return "UnknownSample";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::too_large: return "TooLarge";
    case errc::not_in_family: return "NotInFamily";
    case errc::inconsistent_observation: return "InconsistentObservation";
    case errc::zero_evidence: return "ZeroEvidence";
    case errc::instance_mismatch: return "InstanceMismatch";
    case errc::invalid_instance: return "InvalidInstance";
    case errc::invalid_prior: return "InvalidPrior";
    case errc::invalid_arch: return "InvalidArch";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::non_finite_output: return "NonFiniteOutput";
    case errc::format_error: return "FormatError";
    case errc::version_error: return "VersionError";
    case errc::dim_mismatch: return "DimMismatch";
    case errc::empty_set: return "EmptySet";
    case errc::unsupported_model: return "UnsupportedModel";
    case errc::divergence: return "Divergence";
    case errc::single_class_data: return "SingleClassData";
    case errc::missing_label: return "MissingLabel";
    case errc::vocab_mismatch: return "VocabMismatch";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const { return code_; }

  // Stable CLI contract: 0 success, 2 usage, 3 data/format, 4 infeasible scale.
  int exit_code() const { return code_ == errc::too_large ? 4 : 3; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace neuracrypt

#endif
