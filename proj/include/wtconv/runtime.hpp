#ifndef WTCONV_RUNTIME_HPP
#define WTCONV_RUNTIME_HPP

namespace wtconv {

/// Keeps freed tensor buffers in the process heap instead of returning them
/// to the OS after every operation. Layer evaluation allocates many
/// short-lived buffers of a few hundred kilobytes; with the default glibc
/// thresholds each one is a fresh mapping that must be faulted in and zeroed.
/// No effect on other C libraries. Call once at startup.
void retain_heap_buffers();

}  // namespace wtconv

#endif  // WTCONV_RUNTIME_HPP
