n = int(input())
a = list(map(int, input().split()))
best = a[1]
for i in range(2, n):
    best = max(best, a[i])
print(best)
