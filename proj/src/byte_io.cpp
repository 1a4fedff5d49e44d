/* Copyright 2026 The LoadForge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "loadforge/byte_io.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include "loadforge/error.hpp"

namespace loadforge {

namespace {

std::string errno_text() { return std::strerror(errno); }

}  // namespace

PosixFile::PosixFile(const std::filesystem::path& path) : path_(path.string()) {
  fd_ = ::open(path_.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd_ < 0) fail(ErrorCode::kIoError, "cannot open " + path_ + ": " + errno_text());
  struct stat st {};
  if (::fstat(fd_, &st) != 0) {
    const std::string msg = "cannot stat " + path_ + ": " + errno_text();
    ::close(fd_);
    fail(ErrorCode::kIoError, msg);
  }
  size_ = static_cast<std::uint64_t>(st.st_size);
}

PosixFile::~PosixFile() {
  if (fd_ >= 0) ::close(fd_);
}

void PosixFile::read_at(std::uint64_t offset, std::span<std::uint8_t> dst) const {
  std::size_t done = 0;
  while (done < dst.size()) {
    const ssize_t n = ::pread(fd_, dst.data() + done, dst.size() - done,
                              static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::kIoError, "read failed on " + path_ + ": " + errno_text());
    }
    if (n == 0) {
      fail(ErrorCode::kTruncatedFile,
           "unexpected end of file in " + path_ + " at offset " +
               std::to_string(offset + done));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::shared_ptr<const RandomAccessFile> open_random_access(
    const std::filesystem::path& path) {
  return std::make_shared<PosixFile>(path);
}

Bytes read_file(const std::filesystem::path& path) {
  const std::string p = path.string();
  const int fd = ::open(p.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) fail(ErrorCode::kIoError, "cannot open " + p + ": " + errno_text());
  Bytes out;
  struct stat st {};
  if (::fstat(fd, &st) == 0 && st.st_size > 0) {
    out.reserve(static_cast<std::size_t>(st.st_size));
  }
  std::uint8_t buf[1 << 16];
  for (;;) {
    const ssize_t n = ::read(fd, buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string msg = "read failed on " + p + ": " + errno_text();
      ::close(fd);
      fail(ErrorCode::kIoError, msg);
    }
    if (n == 0) break;
    out.insert(out.end(), buf, buf + n);
  }
  ::close(fd);
  return out;
}

void write_file(const std::filesystem::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIoError, "write failed on " + path.string());
}

}  // namespace loadforge
