// Copyright 2026 The zs-apa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZSAPA_SRC_ORT_API_HPP_
#define ZSAPA_SRC_ORT_API_HPP_

// Minimal declaration of the ONNX Runtime C ABI (OrtApi, API version 22),
// enough to run a session. The runtime is loaded with dlopen, so no ONNX
// Runtime headers are needed at build time. Slots the engine never calls are
// declared as void* placeholders; their order must match the upstream
// header, which only ever appends to the table.

#include <cstddef>
#include <cstdint>

namespace zsapa::ort {

struct OrtEnv;
struct OrtStatus;
struct OrtMemoryInfo;
struct OrtSession;
struct OrtValue;
struct OrtRunOptions;
struct OrtTensorTypeAndShapeInfo;
struct OrtSessionOptions;
struct OrtAllocator;

inline constexpr std::uint32_t kApiVersion = 22;

inline constexpr int kLoggingLevelWarning = 2;
inline constexpr int kEnableAllOptimizations = 99;
inline constexpr int kArenaAllocator = 1;
inline constexpr int kMemTypeDefault = 0;

inline constexpr int kElementFloat = 1;
inline constexpr int kElementInt64 = 7;
inline constexpr int kElementBool = 9;

struct OrtApi {
  void* CreateStatus;
  void* GetErrorCode;
  const char* (*GetErrorMessage)(const OrtStatus* status);
  OrtStatus* (*CreateEnv)(int log_severity_level, const char* logid, OrtEnv** out);
  void* CreateEnvWithCustomLogger;
  void* EnableTelemetryEvents;
  void* DisableTelemetryEvents;
  OrtStatus* (*CreateSession)(const OrtEnv* env, const char* model_path, const OrtSessionOptions* options, OrtSession** out);
  void* CreateSessionFromArray;
  OrtStatus* (*Run)(OrtSession* session, const OrtRunOptions* run_options, const char* const* input_names, const OrtValue* const* inputs, std::size_t input_len, const char* const* output_names, std::size_t output_names_len, OrtValue** outputs);
  OrtStatus* (*CreateSessionOptions)(OrtSessionOptions** options);
  void* SetOptimizedModelFilePath;
  void* CloneSessionOptions;
  void* SetSessionExecutionMode;
  void* EnableProfiling;
  void* DisableProfiling;
  void* EnableMemPattern;
  void* DisableMemPattern;
  void* EnableCpuMemArena;
  void* DisableCpuMemArena;
  void* SetSessionLogId;
  void* SetSessionLogVerbosityLevel;
  void* SetSessionLogSeverityLevel;
  OrtStatus* (*SetSessionGraphOptimizationLevel)(OrtSessionOptions* options, int graph_optimization_level);
  OrtStatus* (*SetIntraOpNumThreads)(OrtSessionOptions* options, int intra_op_num_threads);
  OrtStatus* (*SetInterOpNumThreads)(OrtSessionOptions* options, int inter_op_num_threads);
  void* CreateCustomOpDomain;
  void* CustomOpDomain_Add;
  void* AddCustomOpDomain;
  void* RegisterCustomOpsLibrary;
  OrtStatus* (*SessionGetInputCount)(const OrtSession* session, std::size_t* out);
  OrtStatus* (*SessionGetOutputCount)(const OrtSession* session, std::size_t* out);
  void* SessionGetOverridableInitializerCount;
  void* SessionGetInputTypeInfo;
  void* SessionGetOutputTypeInfo;
  void* SessionGetOverridableInitializerTypeInfo;
  OrtStatus* (*SessionGetInputName)(const OrtSession* session, std::size_t index, OrtAllocator* allocator, char** value);
  OrtStatus* (*SessionGetOutputName)(const OrtSession* session, std::size_t index, OrtAllocator* allocator, char** value);
  void* SessionGetOverridableInitializerName;
  void* CreateRunOptions;
  void* RunOptionsSetRunLogVerbosityLevel;
  void* RunOptionsSetRunLogSeverityLevel;
  void* RunOptionsSetRunTag;
  void* RunOptionsGetRunLogVerbosityLevel;
  void* RunOptionsGetRunLogSeverityLevel;
  void* RunOptionsGetRunTag;
  void* RunOptionsSetTerminate;
  void* RunOptionsUnsetTerminate;
  void* CreateTensorAsOrtValue;
  OrtStatus* (*CreateTensorWithDataAsOrtValue)(const OrtMemoryInfo* info, void* p_data, std::size_t p_data_len, const std::int64_t* shape, std::size_t shape_len, int type, OrtValue** out);
  void* IsTensor;
  OrtStatus* (*GetTensorMutableData)(OrtValue* value, void** out);
  void* FillStringTensor;
  void* GetStringTensorDataLength;
  void* GetStringTensorContent;
  void* CastTypeInfoToTensorInfo;
  void* GetOnnxTypeFromTypeInfo;
  void* CreateTensorTypeAndShapeInfo;
  void* SetTensorElementType;
  void* SetDimensions;
  OrtStatus* (*GetTensorElementType)(const OrtTensorTypeAndShapeInfo* info, int* out);
  OrtStatus* (*GetDimensionsCount)(const OrtTensorTypeAndShapeInfo* info, std::size_t* out);
  OrtStatus* (*GetDimensions)(const OrtTensorTypeAndShapeInfo* info, std::int64_t* dim_values, std::size_t dim_values_length);
  void* GetSymbolicDimensions;
  void* GetTensorShapeElementCount;
  OrtStatus* (*GetTensorTypeAndShape)(const OrtValue* value, OrtTensorTypeAndShapeInfo** out);
  void* GetTypeInfo;
  void* GetValueType;
  void* CreateMemoryInfo;
  OrtStatus* (*CreateCpuMemoryInfo)(int allocator_type, int mem_type, OrtMemoryInfo** out);
  void* CompareMemoryInfo;
  void* MemoryInfoGetName;
  void* MemoryInfoGetId;
  void* MemoryInfoGetMemType;
  void* MemoryInfoGetType;
  void* AllocatorAlloc;
  OrtStatus* (*AllocatorFree)(OrtAllocator* allocator, void* p);
  void* AllocatorGetInfo;
  OrtStatus* (*GetAllocatorWithDefaultOptions)(OrtAllocator** out);
  void* AddFreeDimensionOverride;
  void* GetValue;
  void* GetValueCount;
  void* CreateValue;
  void* CreateOpaqueValue;
  void* GetOpaqueValue;
  void* KernelInfoGetAttribute_float;
  void* KernelInfoGetAttribute_int64;
  void* KernelInfoGetAttribute_string;
  void* KernelContext_GetInputCount;
  void* KernelContext_GetOutputCount;
  void* KernelContext_GetInput;
  void* KernelContext_GetOutput;
  void (*ReleaseEnv)(OrtEnv* input);
  void (*ReleaseStatus)(OrtStatus* input);
  void (*ReleaseMemoryInfo)(OrtMemoryInfo* input);
  void (*ReleaseSession)(OrtSession* input);
  void (*ReleaseValue)(OrtValue* input);
  void* ReleaseRunOptions;
  void* ReleaseTypeInfo;
  void (*ReleaseTensorTypeAndShapeInfo)(OrtTensorTypeAndShapeInfo* input);
  void (*ReleaseSessionOptions)(OrtSessionOptions* input);
};

struct OrtApiBase {
  const OrtApi* (*GetApi)(std::uint32_t version);
  const char* (*GetVersionString)();
};

using GetApiBaseFn = const OrtApiBase* (*)();

}  // namespace zsapa::ort

#endif  // ZSAPA_SRC_ORT_API_HPP_
