x = int(input())
if x < 0:
    print(False)
else:
    n = str(x)
    reverse_n = list(reversed(n))
    print(list(n) == reverse_n)
