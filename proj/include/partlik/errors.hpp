#ifndef PARTLIK_ERRORS_HPP
#define PARTLIK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace partlik {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CovarianceNotPd : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct LayoutError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct NotRepresentable : Error { using Error::Error; };
struct RankError : Error { using Error::Error; };
struct ProtocolOrderError : Error { using Error::Error; };
struct TransportTimeout : Error { using Error::Error; };
struct ProtocolAborted : Error { using Error::Error; };
struct ReplayError : Error { using Error::Error; };
struct AuditError : Error { using Error::Error; };
struct AlignmentError : Error { using Error::Error; };
struct MissingDataError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace partlik

#endif
