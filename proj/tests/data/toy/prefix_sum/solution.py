import ast
n = int(input())
nums = ast.literal_eval(input())
out = []
acc = 0
for i in range(n):
    acc += nums[i]
    out.append(acc)
print(out)
