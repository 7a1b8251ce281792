#pragma once

#include <string_view>

namespace socsrl {

/// How observations are shared in a communication round.
///  - perspectives: every agent describes its own, distinct view of the state.
///  - shared_input: in every directed exchange the sender describes exactly
///    the batch the receiver observes.
enum class SampleMode { perspectives, shared_input };

std::string_view to_string(SampleMode mode);
SampleMode sample_mode_from_string(std::string_view name);

}  // namespace socsrl
