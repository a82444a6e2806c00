#include "shipbow/error.hpp"

namespace shipbow {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptImage: return "CorruptImage";
    case Errc::ImageTooSmall: return "ImageTooSmall";
    case Errc::CenterOutOfBounds: return "CenterOutOfBounds";
    case Errc::PointOutOfBounds: return "PointOutOfBounds";
    case Errc::PatchTooSmall: return "PatchTooSmall";
    case Errc::ModelFileMissing: return "ModelFileMissing";
    case Errc::ModelFormatInvalid: return "ModelFormatInvalid";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InferenceFailure: return "InferenceFailure";
    case Errc::TooFewDescriptors: return "TooFewDescriptors";
    case Errc::EmptyDescriptorSet: return "EmptyDescriptorSet";
    case Errc::SingleClassInput: return "SingleClassInput";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ZeroKeypoints: return "ZeroKeypoints";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::NoClasses: return "NoClasses";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::BundleFormatInvalid: return "BundleFormatInvalid";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

}  // namespace shipbow
