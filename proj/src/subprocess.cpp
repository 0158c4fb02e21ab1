#include "bbo/subprocess.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "bbo/errors.hpp"

extern char** environ;

namespace bbo {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe()
{
    static std::once_flag once;
    std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

void close_fd(int& fd)
{
    if (fd >= 0) ::close(fd);
    fd = -1;
}

struct Pipe {
    int read = -1, write = -1;
    Pipe()
    {
        int fds[2];
        if (::pipe2(fds, O_CLOEXEC) != 0) throw SetupError(fmt::format("pipe: {}", std::strerror(errno)));
        read = fds[0];
        write = fds[1];
    }
    ~Pipe()
    {
        close_fd(read);
        close_fd(write);
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;
};

int remaining_ms(std::optional<Clock::time_point> deadline)
{
    if (!deadline) return -1;
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now()).count();
    return static_cast<int>(std::clamp<long long>(left, 0, 1 << 30));
}

} // namespace

ProcessResult run_shell(const std::string& command, const std::string& input,
                        const std::vector<std::pair<std::string, std::string>>& env,
                        std::optional<double> timeout)
{
    ignore_sigpipe();

    // Everything the child needs is prepared before fork: only async-signal-safe
    // calls may run between fork and exec in a multithreaded parent.
    std::vector<std::string> env_strings;
    for (char** e = environ; e && *e; ++e) {
        std::string entry(*e);
        const auto key = entry.substr(0, entry.find('='));
        if (std::none_of(env.begin(), env.end(), [&](const auto& kv) { return kv.first == key; }))
            env_strings.push_back(std::move(entry));
    }
    for (const auto& [k, v] : env) env_strings.push_back(k + "=" + v);
    std::vector<char*> envp;
    for (auto& s : env_strings) envp.push_back(s.data());
    envp.push_back(nullptr);
    std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};

    Pipe in, out, err;
    const pid_t pid = ::fork();
    if (pid < 0) throw SetupError(fmt::format("fork: {}", std::strerror(errno)));
    if (pid == 0) {
        ::setpgid(0, 0);
        if (::dup2(in.read, 0) < 0 || ::dup2(out.write, 1) < 0 || ::dup2(err.write, 2) < 0) ::_exit(127);
        ::execve("/bin/sh", argv, envp.data());
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    close_fd(in.read);
    close_fd(out.write);
    close_fd(err.write);
    ::fcntl(in.write, F_SETFL, ::fcntl(in.write, F_GETFL) | O_NONBLOCK);

    std::optional<Clock::time_point> deadline;
    if (timeout) {
        deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                      std::chrono::duration<double>(std::max(*timeout, 0.0)));
    }

    ProcessResult result;
    std::size_t written = 0;
    if (input.empty()) close_fd(in.write);
    char buf[65536];
    while (out.read >= 0 || err.read >= 0) {
        std::vector<pollfd> fds;
        if (in.write >= 0) fds.push_back({in.write, POLLOUT, 0});
        if (out.read >= 0) fds.push_back({out.read, POLLIN, 0});
        if (err.read >= 0) fds.push_back({err.read, POLLIN, 0});
        const int rc = ::poll(fds.data(), fds.size(), remaining_ms(deadline));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) {
            result.timed_out = true;
            break;
        }
        for (const auto& p : fds) {
            if (!p.revents) continue;
            if (p.fd == in.write) {
                const ssize_t n = ::write(in.write, input.data() + written, input.size() - written);
                if (n > 0) written += static_cast<std::size_t>(n);
                if (n < 0 && errno != EAGAIN && errno != EINTR) close_fd(in.write);
                if (written == input.size()) close_fd(in.write);
                continue;
            }
            int& fd = p.fd == out.read ? out.read : err.read;
            std::string& sink = p.fd == out.read ? result.out : result.err;
            const ssize_t n = ::read(fd, buf, sizeof buf);
            if (n > 0) sink.append(buf, static_cast<std::size_t>(n));
            else if (n == 0 || (errno != EAGAIN && errno != EINTR)) close_fd(fd);
        }
    }
    close_fd(in.write);

    int status = 0;
    while (!result.timed_out) {
        const pid_t w = ::waitpid(pid, &status, WNOHANG);
        if (w == pid) break;
        if (w < 0 && errno != EINTR) break;
        if (deadline && Clock::now() >= *deadline) {
            result.timed_out = true;
            break;
        }
        // Output is closed but the process has not exited yet.
        ::usleep(1000);
    }
    if (result.timed_out) {
        ::kill(-pid, SIGKILL);
        ::kill(pid, SIGKILL);
        while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
        }
        return result;
    }
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.signal = WTERMSIG(status);
    }
    return result;
}

namespace {

std::string tail(const std::string& s, std::size_t n)
{
    return s.size() <= n ? s : s.substr(s.size() - n);
}

std::string last_nonempty_line(const std::string& s)
{
    std::size_t end = s.size();
    while (end > 0) {
        std::size_t start = s.rfind('\n', end - 1);
        start = start == std::string::npos ? 0 : start + 1;
        std::string line = s.substr(start, end - start);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
        if (start == 0) break;
        end = start - 1;
    }
    return {};
}

std::vector<double> response_numbers(const Json& j, const char* key, std::size_t expected)
{
    if (!j.contains(key)) {
        if (expected == 0) return {};
        throw ParseError(fmt::format("response has no '{}' field", key));
    }
    const auto& a = j[key];
    if (!a.is_array()) throw ParseError(fmt::format("'{}' is not an array", key));
    if (a.size() != expected)
        throw ParseError(fmt::format("'{}' has {} values, expected {}", key, a.size(), expected));
    std::vector<double> out;
    for (const auto& v : a) {
        if (!v.is_number()) throw ParseError(fmt::format("'{}' contains a non-number: {}", key, v.dump()));
        out.push_back(v.get<double>());
    }
    return out;
}

TrialResult protocol_failure(std::string why, const ProcessResult& proc)
{
    TrialResult r;
    r.state = TrialState::Failed;
    r.extra["error"] = "protocol error";
    r.extra["protocol_error"] = std::move(why);
    if (!proc.err.empty()) r.extra["stderr"] = tail(proc.err, 2000);
    return r;
}

} // namespace

Objective subprocess_objective(std::string command, std::size_t num_objectives, std::size_t num_constraints,
                               std::optional<double> timeout)
{
    return [command = std::move(command), num_objectives, num_constraints,
            timeout](const Configuration& config, const TrialContext& ctx) {
        Json request;
        request["config"] = config_to_json(config);
        const std::optional<double> limit = ctx.timeout ? ctx.timeout : timeout;
        const auto proc = run_shell(command, request.dump() + "\n",
                                    {{"BBO_TRIAL_INDEX", std::to_string(ctx.trial_index)}}, limit);

        TrialResult r;
        if (proc.timed_out) {
            r.state = TrialState::Timeout;
            r.extra["error"] = fmt::format("no response within {:g} s", *limit);
            return r;
        }
        if (proc.signal != 0 || proc.exit_code != 0) {
            r.state = TrialState::Failed;
            r.extra["error"] = proc.signal != 0 ? fmt::format("killed by signal {}", proc.signal)
                                                : fmt::format("exit status {}", proc.exit_code);
            if (!proc.err.empty()) r.extra["stderr"] = tail(proc.err, 2000);
            return r;
        }
        const auto line = last_nonempty_line(proc.out);
        if (line.empty()) return protocol_failure("no response on stdout", proc);
        Json response;
        try {
            response = Json::parse(line);
        } catch (const Json::parse_error& e) {
            return protocol_failure(fmt::format("response is not valid JSON: {}", tail(line, 200)), proc);
        }
        if (!response.is_object()) return protocol_failure("response is not a JSON object", proc);
        try {
            r.objectives = response_numbers(response, "objectives", num_objectives);
            r.constraints = response_numbers(response, "constraints", num_constraints);
        } catch (const ParseError& e) {
            return protocol_failure(e.what(), proc);
        }
        return r;
    };
}

} // namespace bbo
