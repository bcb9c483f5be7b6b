#pragma once

#include <stdexcept>
#include <string>

namespace subtext {

// Fatal, caller-facing failures. Per-item problems travel as values
// (ItemError, FetchError, Transcript status), never as exceptions.
class SubtextError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FileUnreadable : public SubtextError {
 public:
  explicit FileUnreadable(const std::string& path)
      : SubtextError("cannot read file: " + path) {}
};

class PathUnwritable : public SubtextError {
 public:
  explicit PathUnwritable(const std::string& path)
      : SubtextError("cannot write path: " + path) {}
};

// 4CAT CSV input without an `id` column.
class HeaderMissing : public SubtextError {
 public:
  explicit HeaderMissing(const std::string& what) : SubtextError(what) {}
};

class CsvMalformed : public SubtextError {
 public:
  explicit CsvMalformed(const std::string& what) : SubtextError(what) {}
};

// Input bytes are not a WebVTT file (missing WEBVTT header line).
class NotVtt : public SubtextError {
 public:
  NotVtt() : SubtextError("not a WebVTT file: WEBVTT header line absent") {}
};

class BadTimestamp : public SubtextError {
 public:
  explicit BadTimestamp(const std::string& text)
      : SubtextError("bad WebVTT timestamp: \"" + text + "\""), text_(text) {}
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

class ConfigError : public SubtextError {
 public:
  explicit ConfigError(const std::string& what) : SubtextError(what) {}
};

}  // namespace subtext
